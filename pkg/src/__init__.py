"""
passivelens: passive constructions and their translation strategies in
dependency-parsed Chinese-English parallel corpora.
"""

__version__ = "1.0.0"
__author__ = "passivelens contributors"
