"""Текстовый вывод команд."""

from .messages import Messages

__all__ = ["Messages"]
