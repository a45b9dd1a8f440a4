"""Arithmetic helpers."""

from __future__ import annotations

from .errors import DomainError


def mobius_sieve(n: int) -> list[int]:
    """[mu(1), ..., mu(n)] by a linear sieve."""
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    mu = [0] * (n + 1)
    mu[1] = 1
    composite = bytearray(n + 1)
    primes: list[int] = []
    for i in range(2, n + 1):
        if not composite[i]:
            primes.append(i)
            mu[i] = -1
        for p in primes:
            ip = i * p
            if ip > n:
                break
            composite[ip] = 1
            if i % p == 0:
                mu[ip] = 0
                break
            mu[ip] = -mu[i]
    return mu[1:]
