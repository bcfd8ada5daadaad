"""
Shuffle poset module for SHUFFLE_POSETS
Shuffle words, the chain labeling of W_{M,N} and the local symmetric group action.
"""
from core.shuffles.words import ShuffleWord, Letter, parse_word, shuffle_poset
from core.shuffles.labeling import ShuffleLabeling, CoordinateLabeling, TableLabeling
from core.shuffles.action import LocalAction

__all__ = [
    'ShuffleWord',
    'Letter',
    'parse_word',
    'shuffle_poset',
    'ShuffleLabeling',
    'CoordinateLabeling',
    'TableLabeling',
    'LocalAction',
]
