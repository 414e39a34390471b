from rest_framework import serializers

from elliptic_sos.serializers.fields import ComplexField, ComplexListField


class PartitionReportSerializer(serializers.Serializer):
    point = ComplexListField()
    omega_L = ComplexField()
    z_algebraic = ComplexField(allow_null=True)
    z_symmetrized = ComplexField(allow_null=True)
    z_symmetrized_alt = ComplexField(allow_null=True)
    z_contour = ComplexField(allow_null=True)
    deviations = serializers.DictField(child=serializers.FloatField())
    diagnostics = serializers.DictField(child=serializers.FloatField())
    timings = serializers.DictField(child=serializers.FloatField())


class CheckResultSerializer(serializers.Serializer):
    name = serializers.CharField()
    context = serializers.CharField()
    draws = serializers.IntegerField()
    worst = serializers.FloatField(help_text="Null when a draw produced a non-finite residual")
    tolerance = serializers.FloatField()
    bound = serializers.CharField()
    passed = serializers.BooleanField()


class SuiteReportSerializer(serializers.Serializer):
    name = serializers.CharField()
    passed = serializers.BooleanField()
    checks = CheckResultSerializer(many=True)
