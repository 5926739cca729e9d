"""Kohn-Sham LDA hydrogen pair: binding curve and geometry search.

Unlike Thomas-Fermi theory, the KS-LDA pair binds. This scans D(R),
then lets the derivative-free geometry search find the minimum and
verifies subadditivity E_mol <= 2 E_atom at the optimum.
"""

from fermisurf import (
    GridPolicy,
    NuclearConfiguration,
    bo_ks,
    make_functional,
    min_distance_search,
    subadditivity_check,
)


def main():
    lda = make_functional("lda_exchange")
    policy = GridPolicy(spacing=0.3)

    print("  R      D(R)")
    for R in (1.0, 1.4, 1.8, 2.4):
        cfg = NuclearConfiguration(
            positions=[[-R / 2.0, 0.0, 0.0], [R / 2.0, 0.0, 0.0]],
            charges=[1.0, 1.0],
        )
        s = bo_ks(cfg, lda, policy)
        print(f"  {R:<6.2f} {s.D:+.4f}")
    print()

    result = min_distance_search([1.0, 1.0], lda, policy,
                                 restarts=1, maxiter=25)
    print(f"optimizer: R_M = {result.R_M:.3f}, "
          f"E_mol = {result.E_mol:.5f} ({result.n_evals} evaluations)")
    report = subadditivity_check(result, lda, policy)
    print(f"subadditivity: E_whole = {report.e_whole:.5f} <= "
          f"E_parts = {report.e_parts:.5f} "
          f"(gap {report.gap:+.4f}) -> {'ok' if report.passed else 'violated'}")


if __name__ == "__main__":
    main()
