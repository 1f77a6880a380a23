# Quadrature
QUADRATURE_ABS_TOL = 1e-12
QUADRATURE_REL_TOL = 1e-10
QUADRATURE_MAX_SUBDIVISIONS = 200
ANTIDERIVATIVE_PANELS = 256

# Geometry
DOMAIN_END = 5.0
ADMISSIBILITY_GRID_POINTS = 2048

# Test functions
BUMP_ORDER = 4
BUMP_SCALE_RANGE = (0.1, 0.5)
BUMP_COUNT = 50
BUMP_SEED = 0

# Verification thresholds
RESIDUAL_TOL = 1e-6
TAU_IDENTITY_TOL = 1e-9

# Convergence sweeps
CONVERGENCE_GRID_START = 1e-3
CONVERGENCE_GRID_POINTS = 512
CONVERGENCE_TAUS = (0.2, 0.1, 0.05, 0.025)

# Upstream
GAMMA = 1.4
K = 1.0
RHO_INF = 1.0
U_INF = 1.0

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "stderr": {
            "level": "DEBUG",
            "class": "logging.StreamHandler",
            "formatter": "plain",
            "stream": "ext://sys.stderr",
        },
    },
    "loggers": {
        "hyperslender": {
            "handlers": ["stderr"],
            "level": "WARNING",
            "propagate": False,
        },
    },
}
