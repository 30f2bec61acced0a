"""Configuration settings for the semilinear engine and its script driver."""
import os
from dotenv import load_dotenv

load_dotenv()


def _flag(name, default):
    return os.getenv(name, default).lower() == 'true'


class Config:
    """Base configuration."""
    ENV = os.getenv('SEMILIN_ENV', 'development')
    LOG_LEVEL = os.getenv('SEMILIN_LOG_LEVEL', 'INFO')

    # Script driver defaults (CLI flags override these)
    COEFF = os.getenv('SEMILIN_COEFF', 'Q')
    SEED = int(os.getenv('SEMILIN_SEED', '0'))
    STRICT = _flag('SEMILIN_STRICT', 'False')
    VALIDATE = _flag('SEMILIN_VALIDATE', 'False')
    PARALLEL = _flag('SEMILIN_PARALLEL', 'False')
    WORKERS = int(os.getenv('SEMILIN_WORKERS', '4'))

    # Engine tuning
    PRUNE_THRESHOLD = int(os.getenv('SEMILIN_PRUNE_THRESHOLD', '10'))
    REFINE_FACTOR = int(os.getenv('SEMILIN_REFINE_FACTOR', '2'))
    AUDIT_BOUNDARIES = _flag('SEMILIN_AUDIT_BOUNDARIES', 'True')
    RESAMPLES = int(os.getenv('SEMILIN_RESAMPLES', '3'))


class DevelopmentConfig(Config):
    """Development configuration."""
    LOG_LEVEL = 'DEBUG'
    VALIDATE = True


class ProductionConfig(Config):
    """Production configuration."""
    LOG_LEVEL = 'WARNING'


class TestingConfig(Config):
    """Testing configuration."""
    LOG_LEVEL = 'WARNING'
    SEED = 0
    PARALLEL = False


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': Config
}
