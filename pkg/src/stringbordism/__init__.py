"""Tools for computing String bordism of BE8 through dimension 14.

The pipeline: build the Fp-cohomology of K(Z,4) (and its smash square) as a
module over a finite subalgebra of the Steenrod algebra, resolve it minimally,
read off an Adams E2 chart with its h0/h1 structure lines, run differentials
from a short script, and assemble the resulting p-local groups into integral
bordism tables.
"""

__version__ = "0.1.0"
