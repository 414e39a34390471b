import cmath
import logging

from rest_framework import serializers

from elliptic_sos.lattice.algebra import ModelInstance
from elliptic_sos.lattice.partition import CONTOUR_ROUTE, ROUTES
from elliptic_sos.serializers.fields import ComplexField, ComplexListField, RangeField
from elliptic_sos.utils.sampling import SamplingRegion
from elliptic_sos.utils.settings import feature_enabled, get_elliptic_context, get_setting
from elliptic_sos.utils.validation import SUITE_NAMES, parse_routes, parse_suites, validate_tolerance

logger = logging.getLogger('elliptic_sos.serializers.config')

DEFAULT_SEED = 42
DEFAULT_DRAWS = 5
DEFAULT_VERIFY_TAUS = [[0.0, 1.5], [0.0, 2.0], [0.5, 2.0]]
SCAN_PARAMETERS = ('lambda', 'theta', 'zeta')
SCAN_RESIDUALS = ('symmetry', 'fe')


def validate_nome(tau: complex) -> complex:
    if tau.imag <= 0:
        raise serializers.ValidationError(f"tau = {tau} must have a positive imaginary part")
    max_nome = get_setting('MAX_NOME')
    nome = abs(cmath.exp(1j * cmath.pi * tau))
    if nome > max_nome:
        raise serializers.ValidationError(f'|q| = {nome:.4f} exceeds the configured maximum {max_nome}')
    return tau


class StrictKeysMixin:
    """Reject keys that are not declared fields instead of silently dropping them."""

    def to_internal_value(self, data):
        if isinstance(data, dict):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError({key: ['Unknown key'] for key in unknown})
        return super().to_internal_value(data)


class LatticeModelSerializer(StrictKeysMixin, serializers.Serializer):
    tau = ComplexField(required=False, allow_null=True, default=None, help_text='Modular parameter; null selects the trigonometric limit')
    gamma = ComplexField()
    zeta = ComplexField()
    theta = ComplexField()
    mu = ComplexListField(min_length=1)

    def validate_tau(self, value):
        return None if value is None else validate_nome(value)

    def validate_mu(self, value):
        max_l = get_setting('MAX_L')
        if len(value) > max_l:
            raise serializers.ValidationError(f'L = {len(value)} exceeds the configured maximum {max_l}')
        return value

    def create(self, validated_data):
        """Build the ModelInstance; DegenerateParameter from its genericity checks propagates to the caller."""
        ctx = get_elliptic_context(validated_data.get('tau'))
        return ModelInstance(ctx=ctx, gamma=validated_data['gamma'], zeta=validated_data['zeta'], theta=validated_data['theta'], mu=tuple(validated_data['mu']))


class SamplingSerializer(StrictKeysMixin, serializers.Serializer):
    seed = serializers.IntegerField(min_value=0, max_value=2**64 - 1, default=DEFAULT_SEED)
    real = RangeField(required=False, default=list(SamplingRegion.real))
    imag = RangeField(required=False, default=list(SamplingRegion.imag))


class ContourSerializer(StrictKeysMixin, serializers.Serializer):
    radius = serializers.FloatField(required=False, allow_null=True, default=None, min_value=0.0)
    nodes = serializers.IntegerField(required=False, default=None, allow_null=True, min_value=8)
    radius_fraction = serializers.FloatField(required=False, default=None, allow_null=True, min_value=0.0, max_value=0.5)

    def validate_radius(self, value):
        if value is not None and value <= 0:
            raise serializers.ValidationError('radius must be positive')
        return value


class ScanAxisSerializer(StrictKeysMixin, serializers.Serializer):
    parameter = serializers.ChoiceField(choices=SCAN_PARAMETERS)
    index = serializers.IntegerField(required=False, default=1, min_value=1)
    start = ComplexField()
    stop = ComplexField()
    num = serializers.IntegerField(min_value=0, max_value=10000)


class ScanSerializer(ScanAxisSerializer):
    second = ScanAxisSerializer(required=False, allow_null=True, default=None)
    route = serializers.ChoiceField(choices=[route for route in ROUTES], default='a')
    residuals = serializers.ListField(child=serializers.ChoiceField(choices=SCAN_RESIDUALS), required=False, default=list)
    lam0 = ComplexField(required=False, default=complex(0.37, 0.11), help_text='Auxiliary spectral parameter of the functional equation residual')

    def validate(self, data):
        second = data.get('second')
        if second and second['parameter'] == data['parameter'] and (data['parameter'] != 'lambda' or second['index'] == data['index']):
            raise serializers.ValidationError({'second': 'The two scan axes must vary different parameters'})
        return data


class VerifySerializer(StrictKeysMixin, serializers.Serializer):
    taus = serializers.ListField(child=ComplexField(), required=False, default=lambda: [complex(*tau) for tau in DEFAULT_VERIFY_TAUS])
    trigonometric = serializers.BooleanField(default=True)
    max_l = serializers.IntegerField(default=3, min_value=1, help_text="Largest L checked for elliptic contexts")
    trig_max_l = serializers.IntegerField(default=4, min_value=1, help_text="Largest L checked in the trigonometric limit")

    def validate_taus(self, value):
        return [validate_nome(tau) for tau in value]

    def _within_max_l(self, value):
        max_l = get_setting('MAX_L')
        if value > max_l:
            raise serializers.ValidationError(f'{value} exceeds the configured maximum L of {max_l}')
        return value

    def validate_max_l(self, value):
        return self._within_max_l(value)

    def validate_trig_max_l(self, value):
        return self._within_max_l(value)


class RunConfigSerializer(StrictKeysMixin, serializers.Serializer):
    """One JSON config document driving eval, verify and scan."""

    model = LatticeModelSerializer(required=False, allow_null=True, default=None)
    point = ComplexListField(required=False, allow_null=True, default=None)
    sampling = SamplingSerializer(required=False, default=dict)
    routes = serializers.JSONField(required=False, default='a,s')
    suites = serializers.JSONField(required=False, default=lambda: list(SUITE_NAMES))
    tolerance = serializers.FloatField(required=False, allow_null=True, default=None)
    draws = serializers.IntegerField(required=False, default=DEFAULT_DRAWS, min_value=1, max_value=1000)
    contour = ContourSerializer(required=False, default=dict)
    scan = ScanSerializer(required=False, allow_null=True, default=None)
    verify = VerifySerializer(required=False, default=dict)

    def validate_routes(self, value):
        return parse_routes(value)

    def validate_suites(self, value):
        return parse_suites(value)

    def validate_tolerance(self, value):
        return None if value is None else validate_tolerance(value)

    def validate(self, data):
        # nested serializers hand back their defaults unvalidated when the key is absent
        for name in ('sampling', 'contour', 'verify'):
            if name not in self.initial_data:
                nested = self.fields[name].__class__(data=data.get(name) or {})
                nested.is_valid(raise_exception=True)
                data[name] = nested.validated_data

        model, point, routes = data.get('model'), data.get('point'), data['routes']
        if model is not None and point is not None and len(point) != len(model['mu']):
            raise serializers.ValidationError({'point': f"Expected {len(model['mu'])} spectral parameters, got {len(point)}"})
        if CONTOUR_ROUTE in routes:
            if not feature_enabled('CONTOUR'):
                raise serializers.ValidationError({'routes': 'The contour route is disabled by ELLIPTIC_SOS_FEATURES'})
            contour_max_l = get_setting('CONTOUR_MAX_L')
            if model is not None and len(model['mu']) > contour_max_l:
                raise serializers.ValidationError({'routes': f'contour route limited to L <= {contour_max_l}'})
        scan = data.get('scan')
        if scan is not None and model is not None:
            for axis in (scan, scan.get('second')):
                if axis and axis['parameter'] == 'lambda' and axis['index'] > len(model['mu']):
                    raise serializers.ValidationError({'scan': f"lambda index {axis['index']} outside 1..{len(model['mu'])}"})
            if scan['route'] == CONTOUR_ROUTE:
                if not feature_enabled('CONTOUR'):
                    raise serializers.ValidationError({'scan': 'The contour route is disabled by ELLIPTIC_SOS_FEATURES'})
                if len(model['mu']) > get_setting('CONTOUR_MAX_L'):
                    raise serializers.ValidationError({'scan': f"contour route limited to L <= {get_setting('CONTOUR_MAX_L')}"})
        return data


def sampling_region(sampling: dict) -> SamplingRegion:
    return SamplingRegion(real=tuple(sampling['real']), imag=tuple(sampling['imag']))
