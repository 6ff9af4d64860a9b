"""Capacity caps for the exhaustive kernels.

Everything in this package that loops over field elements, torsion candidates
or subring representatives checks one of these limits first and raises
CapacityError instead of silently running forever.  The defaults are sized for
desk-scale experiments (q up to ~40000 base fields, torsion extensions up to a
few hundred); raise them explicitly if you know what you are asking for.
"""

from dataclasses import dataclass


class CapacityError(RuntimeError):
    """An exhaustive step would exceed the configured capacity."""


@dataclass
class Caps:
    # largest number of field elements an exhaustive loop may visit
    enumeration_limit: int = 2_000_000
    # largest field order we will construct at all (splitting fields etc.)
    field_order_limit: int = 2 ** 512
    # largest extension degree over the base field for torsion computations
    torsion_degree_limit: int = 128
    # largest number of S/lS representatives enumerated by saturation
    subring_list_limit: int = 10_000_000
    # bound on CRT prime searches for the trace pairing
    trace_prime_limit: int = 200


CAPS = Caps()
