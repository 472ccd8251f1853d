"""
Константы приложения.

Все магические числа и строки в одном месте.
"""

# ═══════════════════════════════════════════════════════════
# СМЕСИ И ЯДРА
# ═══════════════════════════════════════════════════════════

# Атомы ближе чем COALESCE_RTOL * a_m склеиваются при построении меры
COALESCE_RTOL = 1e-10

# Допуск на массу распределения при сэмплировании
MASS_ATOL = 1e-12

# ═══════════════════════════════════════════════════════════
# СОЛВЕРЫ
# ═══════════════════════════════════════════════════════════

DEFAULT_TOL = 1e-7
DEFAULT_MAX_OUTER_ITER = 500
DEFAULT_MAX_INNER_ITER = 2000
DEFAULT_PRUNE_WEIGHT = 1e-10
DEFAULT_GRID_DENSITY = 8

# Потолок поиска = search_upper_factor * X_(n); по умолчанию 2k
DEFAULT_SEARCH_FACTOR_PER_K = 2.0

# Сколько раз удваиваем потолок, если максимум прилип к нему
CEILING_DOUBLINGS = 3
CEILING_HUG_RTOL = 0.01

# Новый атом ближе чем MERGE_RTOL * X_(n) к старому не добавляется
MERGE_RTOL = 1e-8

# EM останавливается при относительном приросте меньше этого
EM_RTOL = 1e-12

# Ньютоновские шаги на фиксированном носителе
NEWTON_MAX_STEPS = 50
NEWTON_RTOL = 1e-15
LINE_SEARCH_MAX_HALVINGS = 30

# Новый столбец с долей независимой нормы ниже этой не добавляется, а сдвигает ближайший атом
COLLINEAR_RTOL = 1e-10

# Не больше стольких атомов за внешнюю итерацию
MAX_NEW_ATOMS = 8

# Точек на один блок при вычислении на больших сетках
EVAL_CHUNK = 2048

# ═══════════════════════════════════════════════════════════
# МИНИМАКС
# ═══════════════════════════════════════════════════════════

# Точек в проверочной сетке возмущения
PERTURBATION_CHECK_POINTS = 2001

# ═══════════════════════════════════════════════════════════
# СИМУЛЯЦИИ
# ═══════════════════════════════════════════════════════════

DEFAULT_ERROR_GRID = (0.1, 8.0)
DEFAULT_ERROR_GRID_POINTS = 512
DEFAULT_REPLICATIONS = 20
DEFAULT_SEED = 17

# ═══════════════════════════════════════════════════════════
# ФАЙЛЫ
# ═══════════════════════════════════════════════════════════

DEFAULT_OUTPUT_DIR = "data/out"
SAMPLE_HEADER = "x"
ROWS_FILE = "rows.csv"
SUMMARY_FILE = "summary.csv"
FITS_DIR = "fits"

# ═══════════════════════════════════════════════════════════
# CLI
# ═══════════════════════════════════════════════════════════

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

# ═══════════════════════════════════════════════════════════
# ЛОГИРОВАНИЕ
# ═══════════════════════════════════════════════════════════

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
