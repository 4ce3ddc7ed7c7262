import math

from app.models.enums import CheckTarget, ModelKind


def validate_required_fields(data, required_fields):
    """Validate that required keys are present in a parsed section"""
    if not data:
        return False, f"No data provided; required keys: {', '.join(required_fields)}"

    for field in required_fields:
        if field not in data or data.get(field) in (None, ''):
            return False, f"{field} is required"

    return True, ""


def validate_float(value, name):
    """Validate a finite real number"""
    try:
        number = float(value)
    except (TypeError, ValueError):
        return False, f"{name} must be a number"

    if not math.isfinite(number):
        return False, f"{name} must be finite"

    return True, number


def validate_positive(value, name):
    """Validate a strictly positive real number"""
    ok, number = validate_float(value, name)
    if not ok:
        return ok, number

    if number <= 0:
        return False, f"{name} must be positive"

    return True, number


def validate_non_negative(value, name):
    """Validate a real number >= 0"""
    ok, number = validate_float(value, name)
    if not ok:
        return ok, number

    if number < 0:
        return False, f"{name} must be non-negative"

    return True, number


def validate_poisson_ratio(value, name='nu'):
    """Validate 0 < nu < 1/2"""
    ok, number = validate_float(value, name)
    if not ok:
        return ok, number

    if not (0 < number < 0.5):
        return False, f"{name} must be between 0 and 0.5"

    return True, number


def validate_count(value, name, minimum=1):
    """Validate an integer count with a lower bound"""
    try:
        count = int(str(value).strip())
    except (TypeError, ValueError):
        return False, f"{name} must be an integer"

    if count < minimum:
        return False, f"{name} must be at least {minimum}"

    return True, count


def validate_grading(value, name='grading'):
    """Validate a mesh grading factor >= 1"""
    ok, number = validate_float(value, name)
    if not ok:
        return ok, number

    if number < 1:
        return False, f"{name} must be at least 1"

    return True, number


def validate_flag(value, name):
    """Validate a boolean written as true/false, yes/no, on/off or 1/0"""
    if isinstance(value, bool):
        return True, value
    text = str(value).strip().lower()
    if text in ('true', 'yes', 'on', '1'):
        return True, True
    if text in ('false', 'no', 'off', '0'):
        return True, False
    return False, f"{name} must be true or false"


def validate_float_list(value, name):
    """Validate a comma separated list of numbers (may be empty)"""
    if isinstance(value, (list, tuple)):
        items = list(value)
    else:
        text = str(value).strip()
        items = [item for item in text.split(',') if item.strip()] if text else []

    numbers = []
    for item in items:
        ok, number = validate_float(item, name)
        if not ok:
            return False, f"{name} must be a comma separated list of numbers"
        numbers.append(number)

    return True, tuple(numbers)


def validate_time_schedule(value, name='snapshots'):
    """Validate a non-negative, non-decreasing list of output times"""
    ok, times = validate_float_list(value, name)
    if not ok:
        return ok, times

    if any(t < 0 for t in times):
        return False, f"{name} must contain non-negative times"

    if any(b < a for a, b in zip(times, times[1:])):
        return False, f"{name} must be sorted"

    return True, times


def validate_model_kind(value):
    """Validate model selector enum"""
    try:
        return True, ModelKind(str(value).strip())
    except ValueError:
        return False, f"Invalid model '{value}'; expected one of {', '.join(e.value for e in ModelKind)}"


def validate_check_target(value):
    """Validate check target enum"""
    try:
        return True, CheckTarget(str(value).strip())
    except ValueError:
        return False, f"Invalid check target '{value}'; expected one of {', '.join(e.value for e in CheckTarget)}"


def validate_interval(a, b, name='domain'):
    """Validate a < b"""
    if not a < b:
        return False, f"{name} must satisfy a < b"

    return True, (a, b)
