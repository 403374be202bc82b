# This program walks through the conic_surfaces toolkit on a few small surfaces.
# (The same operations are available from the command line through `conic-surfaces`.)
#
# It shows:
# - classify: reads the cone-angle data of three spheres and reports which constant-curvature
#   geometry, if any, each of them admits.
# - spectrum: computes the low mode spectrum of a spherical football concurrently, one job per
#   Fourier mode, and checks the lambda_1 >= 2K bound.
# - uniformize: solves the Liouville equation for a flat torus with two cone points.

import logging

from conic_surfaces.datatypes import ConicSurfaceSpec
from conic_surfaces.datatypes import SolverOptions
from conic_surfaces.exceptions import NotUniformizable
from conic_surfaces.geometry import classify
from conic_surfaces.liouville import uniformize
from conic_surfaces.mode_spectral import football_problem
from conic_surfaces.mode_spectral import solve_spectra_sync
from conic_surfaces.mode_spectral import verify_eigenvalue_bound

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

OCTAHEDRON = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)]


def classify_examples():
    specs = {
        "football": ConicSurfaceSpec(
            genus=0, betas=[-0.5, -0.5], positions=[(0.0, 0.0, 1.0), (0.0, 0.0, -1.0)]
        ),
        "three cones": ConicSurfaceSpec(genus=0, betas=["-1/3"] * 3, positions=OCTAHEDRON),
        "unbalanced": ConicSurfaceSpec(
            genus=0, betas=["-4/5", "-1/10", "-1/10"], positions=OCTAHEDRON
        ),
    }
    for name, spec in specs.items():
        verdict = classify(spec)
        logger.info(f"{name}: {verdict.tag.value} (chi_beta={verdict.chi_beta:.4f})")
        if not verdict.uniformizable:
            logger.info(f"{name}: cone {verdict.violated_index} breaks the Troyanov condition")


def football_spectrum(beta: float = -0.5, K: float = 1.0):
    problems = [football_problem(beta, K, mode) for mode in range(4)]
    for result in solve_spectra_sync(problems, count=2):
        values = ", ".join(f"{e.value:.6f} +/- {e.error_bar:.1e}" for e in result.entries)
        logger.info(f"mode {result.mode}: {values}")
    report = verify_eigenvalue_bound(beta, K)
    logger.info(f"lambda_1 >= 2K holds with equality on modes {report.equality_modes}")


def torus_uniformization():
    spec = ConicSurfaceSpec(genus=1, betas=[-0.5, -0.5], positions=[(0.25, 0.25), (0.75, 0.75)])
    try:
        solution = uniformize(spec, SolverOptions(mesh_level=3))
    except NotUniformizable as e:
        logger.error(f"Cannot uniformize: {e}")
        return
    diagnostics = solution.diagnostics
    logger.info(
        f"K={solution.K_target:.6f} after {len(solution.newton_history)} Newton steps, "
        f"residual {diagnostics.residual_sup:.2e}, area {diagnostics.area:.6f}"
    )


def main():
    classify_examples()
    football_spectrum()
    torus_uniformization()


if __name__ == "__main__":
    main()
