"""Averaging, stability and orbit-census tools for group actions on compact metric spaces."""
