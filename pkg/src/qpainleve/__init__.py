"""Exact engine for the quantized Weyl algebra and quantum Painlevé systems.

Subpackages and modules:

- ``coeff``: big rationals, sparse parameter polynomials, rational
  functions, fraction-free linear solving.
- ``weyl``: normal-ordered Laurent elements of the algebra ``[q,p] = h``,
  products, commutators, flows, substitution, classical limit.
- ``classical``: the commutative Poisson counterpart (independent oracle).
- ``catalog``: systems, canonical charts, chart Hamiltonians, alpha-form
  Hamiltonians and Bäcklund generator tables, loaded from data files.
- ``engine``: chart canonicity / polynomiality / reconciliation checks,
  alpha-form comparison, Bäcklund symmetry verification.
- ``characterize``: degree-bounded ansatz, residue conditions, linear solve
  and uniqueness analysis.
- ``cli``: command-line interface and report documents.
"""

__version__ = "0.1.0"
