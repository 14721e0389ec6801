"""Surface tension of segregated two-component condensates in 1D.

Subpackages: closed-form bounds (`analytic`), the discrete transition-energy
minimizer (`solver`), coupling-ratio sweeps (`asymptotics`), Thomas-Fermi
geometry and symmetry breaking (`tf_geometry`), sharp-interface validation
against the full pair energy (`gp_validation`) and the command line (`cli`).
"""

from .grid import Grid1D, ProfilePair

__all__ = ["Grid1D", "ProfilePair"]
__version__ = "0.1.0"
