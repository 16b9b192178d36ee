"""Точное событийное моделирование фенотипического отставания от движущегося оптимума."""

__version__ = "0.1.0"
__author__ = "Developer"
