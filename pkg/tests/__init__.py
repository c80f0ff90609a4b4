"""
Test suite for cslamgen.
"""

# Test suite configuration and shared fixtures go here
