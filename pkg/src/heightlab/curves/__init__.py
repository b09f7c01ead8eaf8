from .weierstrass import CurvePoint, WeierstrassCurve, parse_curve, parse_point
