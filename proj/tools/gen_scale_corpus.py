#!/usr/bin/env python3
"""Writes the scale corpus: 34 classes, 3 enums and 45 associations."""

import sys

CLASSES = [
    "Customer", "Address", "Account", "Order", "OrderLine", "Product", "Category", "Supplier",
    "Warehouse", "StockItem", "Shipment", "Carrier", "Invoice", "Payment", "Refund", "Discount",
    "Coupon", "Cart", "CartItem", "Review", "Rating", "Wishlist", "Notification", "EmailSender",
    "SmsSender", "AuditLog", "User", "Role", "Permission", "Session", "Report", "ReportJob",
    "Scheduler", "PriceRule",
]
ENUMS = {
    "OrderState": ["NEW", "PAID", "SHIPPED", "DELIVERED", "CANCELLED"],
    "PaymentMethod": ["CARD", "INVOICE", "TRANSFER", "WALLET"],
    "Channel": ["EMAIL", "SMS", "PUSH"],
}
OPS = ["-->", "--", "<>--", "*--", "--*", "<-->", "extends", "implements", "--<>", "<--", "!--", "--!"]
TYPES = ["int", "string", "Money", "Date", "bool", "UUID"]
COLUMNS = 6
DX, DY = 260, 260


def class_block(i, name):
    x, y = (i % COLUMNS) * DX, (i // COLUMNS) * DY
    lines = [f'  class("{name}"{", abstract = true" if i % 11 == 5 else ""}) {{']
    lines.append("    public {")
    for k in range(3):
        lines.append(f'      "{name[0].lower()}{name[1:]}Field{k} : {TYPES[(i + k) % len(TYPES)]}"')
    lines.append(f'      "process{k}(input : {TYPES[i % len(TYPES)]}) : bool"')
    lines.append("    }")
    lines.append("    private {")
    lines.append(f'      "cache : Map<string, {TYPES[(i + 2) % len(TYPES)]}>"')
    lines.append(f'      "validate() : bool"')
    lines.append("    }")
    lines.append("    layout {")
    lines.append(f"      pos = apos({x}, {y})")
    lines.append("    }")
    lines.append("  }")
    return lines


def enum_block(j, name, literals):
    x, y = COLUMNS * DX, j * DY
    lines = [f'  enum("{name}") {{']
    lines += [f'    "{lit}"' for lit in literals]
    lines.append(f"    layout {{ pos = apos({x}, {y}) }}")
    lines.append("  }")
    return lines


def associations():
    lines = []
    n = len(CLASSES)
    count = 0
    for i in range(n):
        a, b = CLASSES[i], CLASSES[(i + 1) % n]
        op = OPS[i % len(OPS)]
        if i % 4 == 0:
            lines.append(f"  {a} {op} {b} with {{")
            lines.append(f'    label("r{i}", t = 0.5)')
            lines.append("  }")
        else:
            lines.append(f"  {a} {op} {b}")
        count += 1
    for i in range(0, n, 3):
        a, b = CLASSES[i], CLASSES[(i + 7) % n]
        lines.append(f"  {a} --> {b} with {{ over = start().axisAligned(0.5) }}")
        count += 1
    for j, name in enumerate(ENUMS):
        lines.append(f"  {CLASSES[j * 5]} --> {name}")
        count += 1
    return lines, count


def main():
    out = ["// Generated by tools/gen_scale_corpus.py; a shop back office model.", "classDiagram {"]
    for i, name in enumerate(CLASSES):
        out += class_block(i, name)
    for j, (name, literals) in enumerate(ENUMS.items()):
        out += enum_block(j, name, literals)
    assoc, count = associations()
    out += assoc
    out.append("}")
    assert len(CLASSES) == 34 and len(ENUMS) == 3 and count >= 40 and len(out) >= 600, (count, len(out))
    path = sys.argv[1] if len(sys.argv) > 1 else "corpus/scale_34_classes.diag"
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(out) + "\n")


if __name__ == "__main__":
    main()
