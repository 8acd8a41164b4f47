# Tests for heavy-tail-bandits
