#
# Defaults for the ELLIPTIC_SOS_* settings. Include this file at the end of your settings so anything you set
# yourself is kept. If you add a setting here also add it to elliptic_sos.utils.settings.DEFAULTS and docs/configuration.md
#

try:
    ELLIPTIC_SOS_FEATURES  # noqa: F821
except NameError:
    ELLIPTIC_SOS_FEATURES = {}

if 'CONTOUR' not in ELLIPTIC_SOS_FEATURES:
    ELLIPTIC_SOS_FEATURES['CONTOUR'] = True

try:
    ELLIPTIC_SOS_SERIES_TOL  # noqa: F821
except NameError:
    ELLIPTIC_SOS_SERIES_TOL = 1e-16

try:
    ELLIPTIC_SOS_MAX_TERMS  # noqa: F821
except NameError:
    ELLIPTIC_SOS_MAX_TERMS = 64

try:
    ELLIPTIC_SOS_GUARD  # noqa: F821
except NameError:
    ELLIPTIC_SOS_GUARD = 1e-12

try:
    ELLIPTIC_SOS_MAX_NOME  # noqa: F821
except NameError:
    ELLIPTIC_SOS_MAX_NOME = 0.85

try:
    ELLIPTIC_SOS_MAX_L  # noqa: F821
except NameError:
    ELLIPTIC_SOS_MAX_L = 8

try:
    ELLIPTIC_SOS_CONTOUR_MAX_L  # noqa: F821
except NameError:
    ELLIPTIC_SOS_CONTOUR_MAX_L = 3

try:
    ELLIPTIC_SOS_CONTOUR_NODES  # noqa: F821
except NameError:
    ELLIPTIC_SOS_CONTOUR_NODES = 128

try:
    ELLIPTIC_SOS_CONTOUR_RADIUS_FRACTION  # noqa: F821
except NameError:
    ELLIPTIC_SOS_CONTOUR_RADIUS_FRACTION = 0.05

try:
    ELLIPTIC_SOS_ROUTE_TOLERANCE  # noqa: F821
except NameError:
    ELLIPTIC_SOS_ROUTE_TOLERANCE = 1e-9
