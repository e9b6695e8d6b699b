"""Data models for wavefront-kdv"""
