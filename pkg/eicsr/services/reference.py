"""
Reference corpus of textbook physics formulas.

Used as the "real formula" side when comparing generated corpora. Variables
are renamed x1..xd in order of appearance; pi is written as 3.14159.
"""
from functools import lru_cache

from eicsr.core.expression import Expression
from eicsr.core.parser import parse

REFERENCE_FORMULAS: tuple[str, ...] = (
    "exp(-x1^2/2)/sqrt(2*3.14159)",
    "exp(-(x1/x2)^2/2)/(sqrt(2*3.14159)*x2)",
    "exp(-((x1-x2)/x3)^2/2)/(sqrt(2*3.14159)*x3)",
    "sqrt((x2-x1)^2+(x4-x3)^2)",
    "x1*x2/(x3-x4)^2",
    "x1/sqrt(1-x2^2/x3^2)",
    "x1*x2",
    "x1*x2*x3",
    "x1*x2^2/2",
    "x1*x2/x3",
    "x1*x2/x3^2",
    "x1*x2/(4*3.14159*x3*x4^2)",
    "x1*x2*sin(x3)",
    "x1*x2*cos(x3)",
    "x1*x2/sqrt(1-x2^2/x3^2)",
    "(x1+x2)/(1+x1*x2/x3^2)",
    "x1*x2+x3*x4",
    "x1*(x2^2+x3^2+x4^2)/2",
    "x1*(x2-x3)",
    "x1/(4*3.14159*x2*x3^2)",
    "x1*x2^2",
    "x1*x2*x3^2/2",
    "x1/(2*3.14159*x2)",
    "x1*exp(-x2/(x3*x4))",
    "x1*x2*x3/x4",
    "1/(x1/x2+x3/x4)",
    "x1*sin(x2*x3/2)^2/sin(x3/2)^2",
    "x1/(x2*(x3-x4))",
    "x1/(x2*x3)",
    "x1*x2/(x3*x4)",
    "x1*x2*x3*x4",
    "x1/(1-x2/x3)",
    "(1+x1/x2)/sqrt(1-x1^2/x2^2)*x3",
    "x1*x2/(2*3.14159)",
    "x1*x2*x3/2",
    "x1*x2*x3*(x4-x5)",
    "x1^2*x2/2",
    "x1*x2^2*x3/2",
    "x1*x2*x3/(x4*x5)",
    "x1*(exp(x2*x3/(x4*x5))-1)",
    "x1*x2*x3/(x4*sqrt(2*x5))",
    "x1*x2/(exp(x1*x2/(x3*x4))-1)",
    "x1/(4*3.14159*x2*x3)",
    "3*x1*x2/2",
    "x1*x2/(x3-1)",
    "x1*sqrt(x2/x3)",
    "sqrt(x1*x2/x3)",
    "x1*x2*x3*cos(x4)",
    "x1*x2*x3*sin(x4)",
    "x1*x2^2*sin(x3)^2/(x4*x5^2)",
    "2*3.14159*sqrt(x1/x2)",
)


@lru_cache(maxsize=1)
def reference_corpus() -> tuple[Expression, ...]:
    return tuple(parse(text) for text in REFERENCE_FORMULAS)
