"""Checking a schedule's optimality and exhibiting its certificate.

Optimality of a feasible schedule is equivalent to three checkable
conditions: constant per-packet rates, no idle time in any epoch with
transmittable packets, and rate dominance inside every epoch (whoever
transmits there is at least as fast as whoever waits).  Schedules that
pass admit Lagrange multipliers; schedules that do not are beaten by a
reshuffle, and the report says where.
"""

import numpy as np

from txsched import (
    Packet,
    Shannon,
    check_optimality,
    extract_certificate,
    normalize_instance,
    schedule_from_allocation,
    solve,
)

model = Shannon(1.0)
instance = normalize_instance(
    [
        Packet(1, bits=2.0, arrival=0.0, deadline=2.0),
        Packet(2, bits=1.0, arrival=0.5, deadline=1.0),
    ]
)

schedule = solve(instance, model)
report = check_optimality(instance, schedule, model)
print("solver output optimal:", report.optimal)
for cond in report.epoch_rate_conditions:
    print(f"  epoch {cond.epoch}: transmitting {sorted(cond.positive)} "
          f"at {cond.common_rate:.4g}, waiting {sorted(cond.zero)}")

cert = extract_certificate(instance, schedule, model)
print("\nmultipliers:")
print("  beta (epoch time prices):   ", np.round(cert.beta, 4))
print("  lambda (bit prices):        ", np.round(cert.lam, 4))
print("  gamma[packet 1, epoch 2] =  ", round(cert.gamma[0, 1], 4),
      "(the energy margin by which packet 2 outbids it there)")

# Nudge the allocation: give the slow packet a slice of the busy epoch.
tau = schedule.tau.copy()
tau[0, 1] += 0.05
tau[1, 1] -= 0.05
worse = schedule_from_allocation(instance, tau, model)
report = check_optimality(instance, worse, model)
print("\nafter moving 0.05 s of the busy epoch to the slow packet:")
print(f"  energy {schedule.energy:.6f} -> {worse.energy:.6f} J")
print("  still optimal?", report.optimal)
for cond in report.epoch_rate_conditions:
    if not (cond.equal_rates_ok and cond.dominance_ok):
        print(f"  violated in epoch {cond.epoch}: rates "
              f"{[round(float(worse.rates[i - 1]), 4) for i in sorted(cond.positive)]}"
              " share the epoch but differ")
