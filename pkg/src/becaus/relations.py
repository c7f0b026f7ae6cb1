"""The six causal relations between two observed series theta and psi.

Relations 2..5 are directed; 1 and 6 are symmetric. INCONCLUSIVE (0) is a
classifier outcome only, never a generator truth: it flags a test pattern
that matches none of the six relations, which signals violated assumptions
rather than a seventh relation.
"""
from __future__ import annotations

from enum import IntEnum

__all__ = ["Relation", "DIRECTED_SWAP"]


class Relation(IntEnum):
    INCONCLUSIVE = 0
    INDEPENDENT = 1            # theta and psi unrelated
    THETA_TO_PSI = 2           # theta fully drives psi
    PSI_TO_THETA = 3           # psi fully drives theta
    THETA_AND_LATENT_TO_PSI = 4  # theta drives psi alongside a latent input
    PSI_AND_LATENT_TO_THETA = 5  # psi drives theta alongside a latent input
    LATENT_COMMON_CAUSE = 6    # a latent input drives both

    @property
    def label(self) -> str:
        return "Inconclusive" if self == 0 else f"Relation {int(self)}"

    @property
    def arrow(self) -> str:
        return {
            0: "?",
            1: "theta _|_ psi",
            2: "theta -> psi",
            3: "psi -> theta",
            4: "theta,(v) -> psi",
            5: "psi,(v) -> theta",
            6: "(v) -> theta,psi",
        }[int(self)]

    def swapped(self) -> "Relation":
        """The relation seen after exchanging the roles of theta and psi."""
        return Relation(DIRECTED_SWAP.get(int(self), int(self)))


# argument swap exchanges the directed pairs and fixes 0, 1, 6
DIRECTED_SWAP = {2: 3, 3: 2, 4: 5, 5: 4}
