from rest_framework import serializers

from elliptic_sos.utils.serialization import complex_to_pair
from elliptic_sos.utils.validation import validate_complex_pair


class ComplexField(serializers.Field):
    """A complex number written as [re, im]."""

    default_error_messages = {'invalid': 'Must be a two element list [re, im] of finite numbers'}

    def to_internal_value(self, data):
        return validate_complex_pair(data)

    def to_representation(self, value):
        return complex_to_pair(value)


class ComplexListField(serializers.ListField):
    def __init__(self, **kwargs):
        kwargs.setdefault('child', ComplexField())
        super().__init__(**kwargs)


class RangeField(serializers.ListField):
    """[low, high] with low < high."""

    def __init__(self, **kwargs):
        kwargs.setdefault('child', serializers.FloatField())
        kwargs.setdefault('min_length', 2)
        kwargs.setdefault('max_length', 2)
        super().__init__(**kwargs)

        def validator(value):
            if not value[0] < value[1]:
                raise serializers.ValidationError(f"Range must be increasing, got {value}")

        self.validators.append(validator)
