# Numeric, reporting and console helpers for heavy-tail-bandits
