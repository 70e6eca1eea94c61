"""Simulation and verification for partially observed mean-field control."""

try:
    from ._mfsmp import (
        forward_summary,
        preset_config,
        preset_names,
        roundtrip_config,
        run,
        wasserstein1,
    )
except ImportError:  # extension built outside the package (in-tree test runs)
    from _mfsmp import (
        forward_summary,
        preset_config,
        preset_names,
        roundtrip_config,
        run,
        wasserstein1,
    )

__all__ = [
    "forward_summary",
    "preset_config",
    "preset_names",
    "roundtrip_config",
    "run",
    "wasserstein1",
]
