//! Weighted norms (stub while building).
