"""orbitkit: exact orbit-method computations for finite nilpotent p-groups.

The pipeline runs from the free Lie algebra (Campbell-Hausdorff series with
p-adic valuation certificates) through Lazard's correspondence to coadjoint
orbits, Kirillov characters, and a brute-force character-table oracle that
cross-checks them.
"""

__version__ = "0.1.0"
