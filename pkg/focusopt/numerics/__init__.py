"""
数值基础模块 - 特殊函数与求积
"""

from .specfun import BesselOrder, surface_area, ball_volume, bessel_j, bessel_j_reference
from .quadrature import sphere_grid, ball_grid, integrate_sphere, integrate_ball

__all__ = [
    'BesselOrder',
    'surface_area',
    'ball_volume',
    'bessel_j',
    'bessel_j_reference',
    'sphere_grid',
    'ball_grid',
    'integrate_sphere',
    'integrate_ball',
]
