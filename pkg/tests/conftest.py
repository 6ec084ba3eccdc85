import random

import pytest

from guandan.cards import codes_to_cards


def cards(text: str) -> list[int]:
    """Build concrete cards from space-separated codes; repeated codes
    take the second pack copy."""
    return codes_to_cards(text.split())


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
