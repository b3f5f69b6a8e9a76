"""Decision corpus shared by the search, oracle and acceptance tests."""

PROVABLE = [
    "p |- p",
    "p * q |- q * p",
    "p /\\ q |- p",
    "p , (p -* q) |- q",
    "p * (q \\/ r) |- (p * q) \\/ (p * r)",
    "ox |- I",
    "(p -* top) -> q |- p -* top",
    "(p -* top) -> q |- top",
    "p ; q |- q /\\ p",
    "p |- p \\/ q",
    "q |- p \\/ q",
    "p ; (p -> q) |- q",
    "p |- q -> p",
    "p |- q -* (p * q)",
    "p * q |- p * q",
    "(p * q) * r |- p * (q * r)",
    "p |- p /\\ p",
    "p , q |- q * p",
    "I , p |- p",
    "p |- I * p",
    "bot |- p * q",
    "o+ |- top",
    "p ; q |- p",
    "(p \\/ q) * r |- (p * r) \\/ (q * r)",
    "p |- top -> (I * p)",
    "(p \\/ (p -> bot)) -> bot |- bot",
    "p -* (q -* r) |- (p * q) -* r",
    "(p * q) -* r |- p -* (q -* r)",
    "p ; (p -> (p -> q)) |- q",
    "I |- top -> (I * I)",
]
UNPROVABLE = [
    "p |- p * p",
    "p * q |- p",
    "top |- I",
    "o+ |- top -> (I * I)",
    "p |- q",
    "p , q |- p",
    "p |- p * q",
    "p -* q |- q",
    "p \\/ q |- p",
    "top |- top -> (I * I)",
    "(p -> q) -> p |- p",
    "o+ |- p \\/ (p -> bot)",
    "p /\\ (q * r) |- (p /\\ q) * r",
    "p * p |- p",
    "p , q |- p /\\ q",
    "(p -* q) , p |- q * p",
    "p ; (q -* r) |- r",
    "top |- p -> q",
]
