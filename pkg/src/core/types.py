"""
Type aliases для улучшения читаемости кода.
"""

import numpy as np
import numpy.typing as npt

# Массивы
FloatArray = npt.NDArray[np.float64]
