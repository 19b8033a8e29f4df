"""
Configuration for the static-manifold inequality verifier
All numerical tolerances and run defaults in one place
"""
import os
from pathlib import Path

# --- Space Form Model ---
AMBIENT_DIM = 3  # Mesh pipeline is fixed to n = 3

# Relative tolerance for "point lies on the model" checks
MODEL_TOL = 1e-12

# Generated surfaces must stay this far (in units of 1/sqrt(kappa)) inside
# the open hemisphere, where the static potential is positive
HEMISPHERE_MARGIN = 0.05

# Agreement of the linear static potential with cosh/cos of the distance
NORMALIZATION_RTOL = 1e-9

# --- Surface Operators ---
# Step (in direction-sphere parameter units) for the 4th-order curvature stencil
FD_STEP = 1e-4

# Triangles with an intrinsic angle below this are rejected (radians)
DEGENERATE_ANGLE = 1e-6

# Directions with |omega_z| above this use e_x as helper axis for the stencil
FD_HELPER_SWITCH = 0.9

# --- Linear Solver ---
CG_RTOL = float(os.getenv("STATICINEQ_CG_RTOL", 1e-10))
CG_ITER_FACTOR = 20  # maxiter = factor * sqrt(dof)

# Centroids sampled for the 4th-order derivative check of analytic fields
FIELD_CHECK_POINTS = 16

# Slack allowed on the discrete maximum principle before a warning is raised
MAX_PRINCIPLE_SLACK = 1e-10

# --- Inequality Sweeps ---
SWEEP_TOL_FACTOR = float(os.getenv("STATICINEQ_SWEEP_TOL", 0.5))  # tol(h) = c * h * scale
DEFAULT_POLY_DEGREE = 3
DEFAULT_SEED = 42
DEFAULT_SWEEP_COUNT = 200
CROSS_CHECK_SEED = 7

# --- Performance ---
# Thread pool size for ensemble sweeps
EXECUTOR_MAX_WORKERS = int(os.getenv("STATICINEQ_WORKERS", 4))

# --- Output ---
OUTPUT_DIR = Path(os.getenv("STATICINEQ_OUTPUT_DIR", "./reports"))
MESH_FLOAT_DIGITS = 17

# Debug print options (library calls are silent unless enabled)
VERBOSE = os.getenv("STATICINEQ_VERBOSE", "0") == "1"
DEBUG_PRINT_MESH = VERBOSE
DEBUG_PRINT_GEOMETRY = VERBOSE
DEBUG_PRINT_SOLVER = VERBOSE
DEBUG_PRINT_REILLY = VERBOSE
DEBUG_PRINT_SWEEP = VERBOSE

# --- Derived Constants ---
MESH_FLOAT_FORMAT = f"%.{MESH_FLOAT_DIGITS}g"
FD_WEIGHTS_FIRST = (1 / 12, -8 / 12, 0.0, 8 / 12, -1 / 12)
FD_WEIGHTS_SECOND = (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12)
