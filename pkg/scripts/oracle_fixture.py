"""High-precision reference values for the exact two-state fixture used in the tests.

Runs the raw GBDT recursion and the closed-form Weyl function in 60-digit
mpmath arithmetic, independent of the double-precision engine, and prints
the values that ``tests/test_oracle_fixture.py`` freezes.

    python scripts/oracle_fixture.py
"""
import mpmath as mp

mp.mp.dps = 60
I = mp.mpc(0, 1)


def exact_fixture():
    """``X = [[2,1],[1,1]]``, ``C = [2, i]``, ``B = [1; 1/2]``, ``K = [[2, i], [-i, -2]]``."""
    X = mp.matrix([[2, 1], [1, 1]])
    S0 = X ** -1
    C = mp.matrix([[2, I]])
    B = mp.matrix([[1], [mp.mpf(1) / 2]])
    theta1 = I * S0 * C.H
    theta2 = B
    H = theta1 * theta1.H - theta2 * theta2.H
    K = mp.matrix([[2, I], [-I, -2]])
    A = (I * H / 2 + K) * X
    return A, S0, theta1, theta2


def potential(A, S0, theta1, theta2, k_max):
    n = A.rows
    Ainv = A ** -1
    Pi = mp.matrix(n, 2)
    for r in range(n):
        Pi[r, 0], Pi[r, 1] = theta1[r, 0], theta2[r, 0]
    j = mp.diag([1, -1])
    S = S0
    grams = []
    for _ in range(k_max + 2):
        grams.append(Pi.H * (S ** -1) * Pi)
        Pi, S = Pi + I * Ainv * Pi * j, S + Ainv * S * Ainv.H + Ainv * Pi * Pi.H * Ainv.H
    eye = mp.eye(2)
    return [eye + grams[k] - grams[k + 1] for k in range(k_max + 1)]


def weyl(A, S0, theta1, theta2, z):
    Across = A + I * theta2 * theta2.H * S0 ** -1
    return (-I * z * theta1.H * S0 ** -1 * (mp.eye(A.rows) + z * Across) ** -1 * theta2)[0, 0]


def main():
    A, S0, t1, t2 = exact_fixture()
    print("A =", [[mp.nstr(A[r, c], 20) for c in range(2)] for r in range(2)])
    Cs = potential(A, S0, t1, t2, 12)
    for k in (0, 1, 5, 12):
        print(f"C_{k} =", [[mp.nstr(Cs[k][r, c], 20) for c in range(2)] for r in range(2)])
    for z in (-1j, mp.mpc(0.5, -2)):
        print(f"phi({z}) =", mp.nstr(weyl(A, S0, t1, t2, mp.mpc(z)), 20))


if __name__ == "__main__":
    main()
