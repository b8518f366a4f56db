# config.py

import os

# ---------- PATHS ----------
BASE_DIR = os.path.dirname(os.path.abspath(__file__))

OUTPUT_DIR = os.environ.get("HETLAB_OUTPUT_DIR", os.path.join(BASE_DIR, "output"))

VERSION = "0.3.0"

# ---------- PARALLELISM ----------

def worker_count() -> int:
    """
    Number of worker processes for Monte Carlo sampling.
    HETLAB_THREADS caps it; default is every available core.
    """
    cores = os.cpu_count() or 1
    raw = os.environ.get("HETLAB_THREADS")
    if not raw:
        return cores
    try:
        n = int(raw)
    except ValueError:
        return cores
    return max(1, min(n, cores))


# ---------- MODEL ----------
SUBSPACE_TOL = 1e-9          # membership tolerance for integrated trajectories

# ---------- ANALYSIS ----------
ROOT_SCAN_HALF_WIDTH = 50.0  # p12 scan on x1 in [-X, X]
ROOT_SCAN_POINTS = 20001
BISECTION_TOL = 1e-10
TIE_REL_TOL = 1e-12

# ---------- INTEGRATOR ----------
INTEGRATOR_DEFAULTS = {
    "rel_tol": 1e-9,
    "abs_tol": 1e-11,
    "initial_step": 1e-3,
    "max_step": 1.0,
    "max_time": 100.0,
    "max_steps": 10_000_000,
    "blowup_norm": 1e6,
    "convergence_tol": 1e-13,
}

EVENT_TOL = 1e-10

# ---------- EXPERIMENTS ----------
CLASSIFIER_DEFAULTS = {
    "r_a": 0.1,
    "r_b": 0.1,
    "h": 0.5,
    "phi_cutoff": 0.01,
    "loops_max": 50,
    "confirm_loops": 3,
    "section_timeout": 200.0,
    "timeout_factor": 10.0,
}

SHOOT_OFFSET = 1e-5
CONNECTION_TARGET_RADIUS = 1e-7
CONNECTION_MAX_TIME = 2000.0

BASIN_EPS_LEVELS = (1e-2, 1e-3)
BASIN_SAMPLES = 1000
TUBE_CENTERS = 400
CONFIDENCE_LEVEL = 0.95

INDEX_LADDER_TOP = 1e-2
INDEX_LADDER_LEVELS = 10
INDEX_LADDER_RATIO = 10 ** -0.5
