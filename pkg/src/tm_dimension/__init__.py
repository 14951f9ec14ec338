"""Box dimension of small Turing machines.

Exhaustively mines (n,2) Turing machine spaces, measures runtime, space
and black-cell sequences from their space-time diagrams, fits exact
closed forms to those sequences and derives each machine's box dimension.
"""

__version__ = "1.0.0"
