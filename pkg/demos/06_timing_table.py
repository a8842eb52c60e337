"""Time encryption and decryption next to the 2012 handset figures.

The handset rows are reference data, printed as given; the local rows are
medians of five interleaved runs on this machine.
"""

from ibcnfc.bench import bench

report = bench([128, 512], p_bits=512, q_bits=160, iterations=5)
print(report.format(","))
print()
print(f"128 B encrypt: {report.row(128).encrypt_ms:.1f} ms here vs 7497,198 ms on the handset")
print(f"size sensitivity (128 vs 512 B encrypt): {report.spread(128, 512):.1%}")
