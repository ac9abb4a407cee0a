"""Unit test package for qkverify."""
