"""Scenario catalog, verification suites, reports and the command line."""
