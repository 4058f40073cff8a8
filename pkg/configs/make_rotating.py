"""Regenerate rotating.yaml: flat space-time seen from axes rotating at 0.3 rad per unit time."""

from pathlib import Path

import yaml

from degspin.config import sampled_to_config
from degspin.newton_cartan import rotating_point_data, sample_field

OMEGA = 0.3

field = sample_field(rotating_point_data(OMEGA), (3, 3, 3, 3), [0.5] * 4, (-0.5, 0.5, 0.0, -0.5))
header = (
    f"# Flat space-time in coordinates rotating about z at omega = {OMEGA}, sampled on a 3^4 grid.\n"
    "# The only interior node is (t, x, y, z) = (0, 1, 0.5, 0); there the connection form has\n"
    f"# rotation coefficient omega^1_2(X_0) = {-OMEGA}.  Generated by make_rotating.py.\n"
)
text = yaml.safe_dump(sampled_to_config(field), default_flow_style=None, sort_keys=False, width=100)
Path(__file__).with_name("rotating.yaml").write_text(header + text)
