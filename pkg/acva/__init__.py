__all__ = ['constants', 'useful_functions', 'noise_model', 'patching', 'clustering', 'spectral', 'va_filter', 'pipeline', 'metrics', 'cli']

__version__ = '1.0'
