"""Demo: manufactured-solution verification of the linear IMEX step.

The forcing applies the continuous frozen-coefficient operator to a chosen
smooth field; the march then reproduces that field at the discretization
order.  Prints the three refinement studies behind the acceptance gate.
"""

from mmbl.core import PhysicalParams
from mmbl.verification import mms_space_study, mms_time_study

params = PhysicalParams(a=1.0, gamma=2.0, mu=0.1, mu_prime=0.1,
                        zeta=0.05, sigma=0.1, delta=0.1)

for result in (mms_space_study(params, levels=3),
               mms_time_study(params, levels=3, integrator="first"),
               mms_time_study(params, levels=3, integrator="second")):
    print(f"{result.label}:")
    for h, e in zip(result.hs, result.errors):
        print(f"  h = {h:10.5g}   error = {e:.4e}")
    print(f"  observed order {result.order:.3f}")
