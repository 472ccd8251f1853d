"""
Тесты для сервисного слоя.
"""
