"""The universal neutral-atom profile and its far-field plateau.

Solves y'' = y^(3/2)/sqrt(x) once, prints the initial slope B, the derived
per-z^(7/3) energy constant, and the approach of r^4 phi(r) to its
universal limit 3^4 2^-3 pi^2 (slow: the correction decays like r^-0.77).
"""

import numpy as np

from fermisurf import atomic_tf, solve_universal
from fermisurf.constants import SOMMERFELD_C
from fermisurf.tf_atom import default_atomic_grid, slope_energy_constant


def main():
    profile = solve_universal()
    e_tf = slope_energy_constant(profile.slope_B)
    print(f"initial slope       B    = {profile.slope_B:.7f}")
    print(f"energy constant     e_TF = {e_tf:.6f}  (E(z) = -e_TF z^(7/3))")
    print(f"far-field plateau   c_S  = {SOMMERFELD_C:.4f}")
    print()

    sol = atomic_tf(1.0, grid=default_atomic_grid(1.0, n=4001,
                                                  r_max_factor=90000.0))
    print(f"TF hydrogen energy  E(1) = {sol.energy:.6f}")
    print()
    print("  r          r^4 phi(r)   ratio to c_S")
    for r_target in (10, 100, 1000, 10000, 80000):
        i = int(np.argmin(np.abs(sol.grid.nodes - r_target)))
        r = sol.grid.nodes[i]
        v = r**4 * sol.phi.values[i]
        print(f"  {r:<10.0f} {v:<12.4f} {v / SOMMERFELD_C:.4f}")
    print()
    print("the plateau is approached from below and never exceeded")


if __name__ == "__main__":
    main()
