from .validators import (
    validate_required_fields, validate_float, validate_positive, validate_non_negative,
    validate_poisson_ratio, validate_count, validate_grading, validate_flag,
    validate_float_list, validate_time_schedule, validate_model_kind, validate_check_target,
    validate_interval
)

__all__ = [
    'validate_required_fields', 'validate_float', 'validate_positive', 'validate_non_negative',
    'validate_poisson_ratio', 'validate_count', 'validate_grading', 'validate_flag',
    'validate_float_list', 'validate_time_schedule', 'validate_model_kind', 'validate_check_target',
    'validate_interval'
]
