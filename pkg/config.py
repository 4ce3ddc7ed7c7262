import os
from pathlib import Path

# Build paths inside the project
BASE_DIR = Path(__file__).resolve().parent


class Config:
    """Base configuration class"""
    LOG_LEVEL = os.environ.get('PHKIT_LOG_LEVEL') or 'INFO'
    LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'
    RUN_CONFIG = os.environ.get('PHKIT_CONFIG')
    PROGRESS = True
    TESTING = False
    # Overrides of the [inse] defaults applied when no run file is given
    INSE_DEFAULTS = {}

    @staticmethod
    def init_app(settings):
        pass


class DevelopmentConfig(Config):
    """Desk-scale runs"""
    INSE_DEFAULTS = {'nx': 48, 'ny': 48, 'dt': 1.0 / 300.0, 't_final': 0.5}


class ProductionConfig(Config):
    """Benchmark resolution"""
    PROGRESS = False
    INSE_DEFAULTS = {'nx': 96, 'ny': 96, 'dt': 1.0 / 600.0, 't_final': 0.75}


class TestingConfig(Config):
    """Testing configuration"""
    TESTING = True
    PROGRESS = False
    LOG_LEVEL = os.environ.get('PHKIT_LOG_LEVEL') or 'WARNING'
    INSE_DEFAULTS = {'nx': 4, 'ny': 4, 'dt': 1.0 / 100.0, 't_final': 0.02}


# Configuration dictionary
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}
