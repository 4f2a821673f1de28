# reproduce command
# Verdict table for the built-in ring study

from typing import List, Optional

from src.core.config import Settings
from src.services.reproduction import ReproductionHarness, ReproductionRow, format_table


def cmd_reproduce(
    settings: Settings, gamma: Optional[float] = None, beta: Optional[float] = None
) -> List[ReproductionRow]:
    """Recompute every configured quantity; ``gamma``/``beta`` override the defaults."""
    return ReproductionHarness(settings, gamma=gamma, beta=beta).run()


__all__ = ["cmd_reproduce", "format_table"]
