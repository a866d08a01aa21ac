"""Physical constants (CODATA) and engine-wide defaults"""

SPEED_OF_LIGHT = 299_792_458.0  # m/s
EPSILON_0 = 8.8541878128e-12  # F/m

# Typical concrete at low GHz; buildings are non-magnetic (mu = mu_0)
DEFAULT_EPS_R = 5.0
DEFAULT_SIGMA = 0.1  # S/m

MIN_GRID_SIDE = 2
