"""
Performance benchmarking package for cslamgen.
"""
