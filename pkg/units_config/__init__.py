import pint
ureg = pint.UnitRegistry()
Quantity = pint.Quantity

# pint keeps gauss in the Gaussian system, so SI fields convert through this factor.
GAUSS_PER_TESLA = 1e4

# mu_B / h, the Zeeman scale used by the level-structure code.
BOHR_MAGNETON_MHZ_PER_GAUSS = float(
    (1 * ureg.bohr_magneton / ureg.planck_constant).to('MHz / tesla').magnitude / GAUSS_PER_TESLA)
