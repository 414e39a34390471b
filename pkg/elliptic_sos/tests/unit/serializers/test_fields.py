import pytest
from rest_framework import serializers

from elliptic_sos.serializers.fields import ComplexField, ComplexListField, RangeField


class FieldsSerializer(serializers.Serializer):
    z = ComplexField(required=False)
    points = ComplexListField(required=False)
    window = RangeField(required=False)


@pytest.mark.parametrize(
    "data,expected",
    [
        ({'z': [1, -2]}, {'z': 1 - 2j}),
        ({'points': [[0.1, 0], [0, 0.2]]}, {'points': [0.1, 0.2j]}),
        ({'window': [-1, 1]}, {'window': [-1.0, 1.0]}),
    ],
)
def test_fields_accept(data, expected):
    serializer = FieldsSerializer(data=data)
    assert serializer.is_valid(), serializer.errors
    assert serializer.validated_data == expected


@pytest.mark.parametrize(
    "data,field",
    [
        ({'z': [1]}, 'z'),
        ({'z': 'i'}, 'z'),
        ({'points': [[0.1, 0], [0.2]]}, 'points'),
        ({'window': [1, 1]}, 'window'),
        ({'window': [2, 1]}, 'window'),
        ({'window': [0, 1, 2]}, 'window'),
    ],
)
def test_fields_reject(data, field):
    serializer = FieldsSerializer(data=data)
    assert not serializer.is_valid()
    assert field in serializer.errors


def test_complex_field_representation():
    assert ComplexField().to_representation(0.5 + 1j) == [0.5, 1.0]
    assert ComplexField().to_representation(complex('nan+1j')) is None
