"""Statistical solution concepts learned from samples.

Submodules: framework (problems, losses, sample sizes, ERM), dimension
(shattering brute force), tu_core, hedonic, condorcet, market, montecarlo
(the (epsilon, delta) harness) and cli.
"""

__version__ = "0.1.0"
