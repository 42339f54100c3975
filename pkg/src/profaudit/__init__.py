"""Audit toolkit for gender representation in encyclopedia profession articles.

The package measures three dimensions on a wiki snapshot: which gendered
job titles exist as articles and where redirects land, who is depicted on
article images (from crowd annotations), and which persons are mentioned
in article text. Results are joined against web-search hit counts and
labor-market statistics and emitted as deterministic CSV/JSON reports.
"""

__version__ = "0.1.0"
