//! Holds the `acceptance` test target, which checks the allocator end to end
//! against brute-force oracles and statistical bounds. Run it with
//! `cargo test -p qalloc-validation --test acceptance`.
