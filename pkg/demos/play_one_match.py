"""Walk through one full Guandan match, narrating what the engine does.

Run from the repository root after installing the package:

    python3 demos/play_one_match.py [seed]

Four seeded agents (two greedy, two random) play a complete match. The
script prints the per-game finish orders, tribute traffic, and the level
ladder both teams climb, finishing with the match winner.
"""

import sys

from guandan.cards import card_code, level_code
from guandan.simulate import default_lineup, play_match


def main() -> None:
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 11
    lineup = ["greedy", "random", "greedy", "random"]
    print(f"seed {seed}: seats 0/2 play greedy, seats 1/3 play random\n")

    result = play_match(seed, default_lineup(lineup, seed=seed), record=True)

    for game in result.games:
        order = "-".join(str(s) for s in game.finish_order)
        levels = "/".join(level_code(v) for v in game.levels_after)
        tag = " best victory!" if game.best_victory else ""
        print(
            f"game {game.game:2d}: finish {order}  team {game.winning_team} "
            f"+{game.upgrade} -> levels {levels}  ({game.steps} plays){tag}"
        )

    tributes = [
        (r["seat"], r["action"])
        for r in result.state.records
        if r["action"]["kind"] in ("Tribute", "Return", "AntiTribute")
    ]
    print(f"\ntribute events across the match: {len(tributes)}")
    for seat, action in tributes[:6]:
        if action["kind"] == "AntiTribute":
            print("  anti-tribute: the losers held both big jokers")
        else:
            card = action["cards"][0]
            print(f"  {action['kind'].lower()}: seat {seat} -> seat {action['to']} ({card})")
    if len(tributes) > 6:
        print(f"  ... and {len(tributes) - 6} more")

    print(f"\nmatch winner: team {result.winner} after {result.steps} plays")
    first_deal = [card_code(c) for c in sorted(result.state.hands[0])]
    print(f"(seat 0 ended holding {len(first_deal)} cards)")


if __name__ == "__main__":
    main()
