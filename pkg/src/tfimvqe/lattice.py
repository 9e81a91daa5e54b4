"""Hypercubic lattice geometry in 1-3 dimensions with periodic boundaries.

Sites are indexed row-major with the last dimension fastest, so for dims
(d0, d1) the site at coordinates (c0, c1) has index c0*d1 + c1.
"""

from __future__ import annotations

from dataclasses import dataclass

from .statevector import MAX_QUBITS


@dataclass(frozen=True)
class LatticeSpec:
    dims: tuple[int, ...]
    periodic: bool = True

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def n_sites(self) -> int:
        n = 1
        for d in self.dims:
            n *= d
        return n

    def site_index(self, coords) -> int:
        idx = 0
        for c, d in zip(coords, self.dims):
            idx = idx * d + (c % d)
        return idx

    def site_coords(self, index: int) -> tuple[int, ...]:
        coords = []
        for d in reversed(self.dims):
            coords.append(index % d)
            index //= d
        return tuple(reversed(coords))


def make_lattice(dims, periodic: bool = True, max_qubits: int = MAX_QUBITS) -> LatticeSpec:
    """Validated lattice constructor; one qubit per site."""
    dims = tuple(int(d) for d in dims)
    if not 1 <= len(dims) <= 3:
        raise ValueError(f"dims must have 1 to 3 entries, got {dims!r}")
    if any(d < 2 for d in dims):
        raise ValueError(f"every lattice dimension must be >= 2, got {dims}")
    lat = LatticeSpec(dims, bool(periodic))
    if lat.n_sites > max_qubits:
        raise ValueError(f"{lat.n_sites} sites exceeds the {max_qubits}-qubit cap")
    return lat


def edges(lat: LatticeSpec) -> tuple[tuple[int, int], ...]:
    """Nearest-neighbor bonds as (a, b) with a < b, each unordered pair once.

    Wrap-around bonds on length-2 dimensions coincide with the interior bond
    and are deduplicated, so such a pair contributes a single bond.
    """
    seen = set()
    out = []
    for site in range(lat.n_sites):
        coords = lat.site_coords(site)
        for axis in range(lat.ndim):
            if coords[axis] + 1 >= lat.dims[axis] and not lat.periodic:
                continue
            nbr = list(coords)
            nbr[axis] = (coords[axis] + 1) % lat.dims[axis]
            other = lat.site_index(nbr)
            pair = (site, other) if site < other else (other, site)
            if pair not in seen:
                seen.add(pair)
                out.append(pair)
    return tuple(out)


def antipodal_pairs(lat: LatticeSpec) -> tuple[tuple[int, int], ...]:
    """Pairs (i, j) where j is i shifted by half the extent in every dimension.

    Defined only for periodic lattices with every dimension even; the pairs
    form a perfect matching (each site appears exactly once, n_sites/2 pairs).
    """
    if not lat.periodic:
        raise ValueError("antipodal pairing needs a periodic lattice")
    if any(d % 2 for d in lat.dims):
        raise ValueError(f"antipodal pairing needs every dimension even, got {lat.dims}")
    seen = set()
    out = []
    for site in range(lat.n_sites):
        coords = lat.site_coords(site)
        partner = lat.site_index([(c + d // 2) % d for c, d in zip(coords, lat.dims)])
        pair = (site, partner) if site < partner else (partner, site)
        if pair not in seen:
            seen.add(pair)
            out.append(pair)
    return tuple(out)
