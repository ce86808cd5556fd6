"""Tree evaluation, pebbling games and branching programs."""
