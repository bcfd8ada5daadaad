"""
Algebra module for SHUFFLE_POSETS
Quasisymmetric flag functions, multiplicative series and the alternating-word language.
"""
from core.algebra.symfunc import SymPoly, flag_qsym
from core.algebra.series import BivariateSeries, MultiplicativeFunction, ShuffleType

__all__ = ['SymPoly', 'flag_qsym', 'BivariateSeries', 'MultiplicativeFunction', 'ShuffleType']
