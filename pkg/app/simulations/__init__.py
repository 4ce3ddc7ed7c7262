"""Model assembly and time loops: nonlocal nanorod, Euler-Bernoulli beams, 2D flow."""
