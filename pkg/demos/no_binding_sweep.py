"""A Thomas-Fermi diatomic never binds: D(R) > 0 along the whole sweep.

Sweeps a homonuclear z = 6 pair over R and prints the Born-Oppenheimer
difference D = E_mol - 2 E_atom + U_R. Atomic references are solved on
grids matched to each molecular box so the nuclear-cusp quadrature error
cancels in the difference.
"""

from fermisurf import GridPolicy, tf_sweep


def main():
    curve = tf_sweep(
        (6.0, 6.0), [0.25, 0.4375, 0.625, 0.8125, 1.0],
        GridPolicy(spacing=0.25),
    ).with_fit()
    print("  R        D(R)        E_mol         U_R")
    for s in curve.samples:
        print(f"  {s.R_min:<8.4f} {s.D:<11.4f} {s.E_mol:<13.4f} {s.U_R:.2f}")
    print()
    print(f"all D > 0 (no binding); log-log slope over this window: "
          f"{curve.fit.exponent:.2f} (r^2 = {curve.fit.r_squared:.3f})")
    print("the -7 power law belongs to the scaling limit, not to a fixed-z")
    print("sweep at short range, where D is capped by U_R")


if __name__ == "__main__":
    main()
