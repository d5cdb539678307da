"""Test package for AI Risk Gatekeeper."""