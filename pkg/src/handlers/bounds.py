"""
Обработчик команды bounds: таблица минимаксных констант и оценок.
"""

import logging
from argparse import Namespace

import numpy as np
import pandas as pd

from src.domain import InvalidArgument, OutputFormat
from src.services.minimax import minimax_bound, minimax_constants, mixing_bound
from src.storage import render_table

logger = logging.getLogger(__name__)


def bounds_table(k: int, js: list[int], x0: float, g0: float, gk: float) -> pd.DataFrame:
    """Строка на каждое j; mixing_bound заполнен только при j = k - 1."""
    rows = []
    for j in js:
        consts = minimax_constants(k, j)
        rows.append(
            {
                "j": j,
                "C_kj": str(consts.C_kj),
                "C_kk": str(consts.C_kk),
                "lambda1_kj": str(consts.lambda1_kj),
                "lambda2_k": str(consts.lambda2_k),
                "lambda2_k_float": float(consts.lambda2_k),
                "d_kj": consts.d_kj,
                "bound": minimax_bound(k, j, g0, gk),
                "mixing_bound": mixing_bound(k, x0, g0, gk) if j == k - 1 else np.nan,
            }
        )
    return pd.DataFrame(rows)


class BoundsHandlers:
    """bounds."""

    def bounds_command(self, args: Namespace) -> str:
        """bounds --k 3 --x0 1 --g0 0.3679 --gk -0.3679 [--j 0,1] [--format csv] [--out table.csv]"""
        js = list(args.j) if args.j else list(range(args.k))
        for j in js:
            if not 0 <= j <= args.k - 1:
                raise InvalidArgument(f"j must lie in [0, {args.k - 1}], got {j}")
        table = bounds_table(args.k, js, args.x0, args.g0, args.gk)
        fmt = OutputFormat(args.format)
        text = render_table(table, fmt)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as f:
                f.write(render_table(table, OutputFormat.CSV))
            logger.info(f"✅ Bounds table written to {args.out}")
        return text.rstrip("\n")
