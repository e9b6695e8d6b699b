"""Numerical pipeline for wavefront-kdv: transforms, propagators, solver, tracer, WPT and detector"""
