# spinmeter.core: evolution engines, quadrature and scenario orchestration
