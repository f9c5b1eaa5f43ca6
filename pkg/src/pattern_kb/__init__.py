"""Pattern-based knowledge engine.

Knowledge is stored as flat symbol patterns. Queries are answered by
building multiple alignments of a New pattern against the stored Old
patterns, scored by how economically New can be encoded:
- Fuzzy recognition and best-match retrieval
- Attribute inheritance through unmatched Old symbols
- Relative and per-inference probabilities from pattern frequencies
"""

__version__ = "1.0.0"
