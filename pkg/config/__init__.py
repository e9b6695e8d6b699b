"""Configuration module for wavefront-kdv"""
