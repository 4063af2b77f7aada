"""Lattice vectors, Burgers vectors and Stone-Wales ring counts of graphene."""

from rcsheet.lattice import LatticeModel, stone_wales_change, stone_wales_counts

lat = LatticeModel()
print(f"bond d = {lat.d} A, lattice constant a = {lat.a:.6f} A")
print(f"a1 = {lat.a1.round(6)}, a2 = {lat.a2.round(6)}, B shift = {lat.delta.round(6)}")

for m, n in ((0, 1), (1, 0), (1, 1), (2, -1)):
    b = lat.burgers(m, n)
    print(f"burgers({m:+d}, {n:+d}) = {b.vector.round(4)}  |b| = {b.strength:.2f} A ({b.strength:.6f})")

rings = (6, 6, 6, 6)
print(f"\nrings {rings}: atoms and bonds {stone_wales_counts(*rings)}")
after = stone_wales_change(*rings)
print(f"after a Stone-Wales rotation {after}: {stone_wales_counts(*after)}")
