#!/usr/bin/env python3
"""Assembles the class-file fixtures and the CountInsns oracle driver.

No Java compiler is needed. Run from this directory:

    python3 assemble.py

The oracle driver uses the JDK class-file API (JDK 24+) to count the
instructions of every method:

    java -XX:+UnlockDiagnosticVMOptions -XX:-BytecodeVerificationRemote -cp oracle CountInsns Simple.class
"""
import struct
from pathlib import Path

HERE = Path(__file__).resolve().parent

ACC_PUBLIC, ACC_PRIVATE, ACC_STATIC, ACC_FINAL = 0x1, 0x2, 0x8, 0x10
ACC_SUPER, ACC_NATIVE, ACC_INTERFACE, ACC_ABSTRACT = 0x20, 0x100, 0x200, 0x400


class Pool:
    def __init__(self):
        self.entries = []  # encoded bytes per slot (None for the shadow slot of long/double)
        self.index = {}

    def _add(self, key, data, wide=False):
        if key in self.index:
            return self.index[key]
        idx = len(self.entries) + 1
        self.entries.append(data)
        if wide:
            self.entries.append(None)
        self.index[key] = idx
        return idx

    def utf8(self, s):
        b = s.encode("utf-8")
        return self._add(("utf8", s), b"\x01" + struct.pack(">H", len(b)) + b)

    def cls(self, name):
        return self._add(("class", name), b"\x07" + struct.pack(">H", self.utf8(name)))

    def string(self, s):
        return self._add(("string", s), b"\x08" + struct.pack(">H", self.utf8(s)))

    def integer(self, v):
        return self._add(("int", v), b"\x03" + struct.pack(">i", v))

    def long(self, v):
        return self._add(("long", v), b"\x05" + struct.pack(">q", v), wide=True)

    def double(self, v):
        return self._add(("double", v), b"\x06" + struct.pack(">d", v), wide=True)

    def nat(self, name, desc):
        return self._add(("nat", name, desc), b"\x0c" + struct.pack(">HH", self.utf8(name), self.utf8(desc)))

    def _ref(self, tag, kind, owner, name, desc):
        return self._add((kind, owner, name, desc), bytes([tag]) + struct.pack(">HH", self.cls(owner), self.nat(name, desc)))

    def field(self, owner, name, desc):
        return self._ref(9, "field", owner, name, desc)

    def method(self, owner, name, desc):
        return self._ref(10, "method", owner, name, desc)

    def imethod(self, owner, name, desc):
        return self._ref(11, "imethod", owner, name, desc)

    def method_handle(self, kind, ref):
        return self._add(("mh", kind, ref), b"\x0f" + struct.pack(">BH", kind, ref))

    def method_type(self, desc):
        return self._add(("mt", desc), b"\x10" + struct.pack(">H", self.utf8(desc)))

    def encode(self):
        out = struct.pack(">H", len(self.entries) + 1)
        for e in self.entries:
            if e is not None:
                out += e
        return out


class Code:
    """Sequential emitter with label fixups for 2- and 4-byte branch offsets."""

    def __init__(self):
        self.buf = bytearray()
        self.labels = {}
        self.fixups = []  # (pos_of_offset, insn_start, label, width)
        self.count = 0

    def op(self, opcode, *operands):
        self.count += 1
        self.buf.append(opcode)
        self.buf += bytes(operands)

    def u2(self, opcode, v):
        self.count += 1
        self.buf.append(opcode)
        self.buf += struct.pack(">H", v)

    def label(self, name):
        self.labels[name] = len(self.buf)

    def branch(self, opcode, label, wide=False):
        self.count += 1
        start = len(self.buf)
        self.buf.append(opcode)
        self.fixups.append((len(self.buf), start, label, 4 if wide else 2))
        self.buf += b"\0" * (4 if wide else 2)

    def _pad(self):
        while len(self.buf) % 4:
            self.buf.append(0)

    def tableswitch(self, low, targets, default):
        self.count += 1
        start = len(self.buf)
        self.buf.append(0xAA)
        self._pad()
        self.fixups.append((len(self.buf), start, default, 4))
        self.buf += b"\0" * 4
        self.buf += struct.pack(">ii", low, low + len(targets) - 1)
        for t in targets:
            self.fixups.append((len(self.buf), start, t, 4))
            self.buf += b"\0" * 4

    def lookupswitch(self, pairs, default):
        self.count += 1
        start = len(self.buf)
        self.buf.append(0xAB)
        self._pad()
        self.fixups.append((len(self.buf), start, default, 4))
        self.buf += b"\0" * 4
        self.buf += struct.pack(">i", len(pairs))
        for key, t in sorted(pairs):
            self.buf += struct.pack(">i", key)
            self.fixups.append((len(self.buf), start, t, 4))
            self.buf += b"\0" * 4

    def wide(self, opcode, index, const=None):
        self.count += 1
        self.buf += bytes([0xC4, opcode]) + struct.pack(">H", index)
        if const is not None:
            self.buf += struct.pack(">h", const)

    def bytes(self):
        for pos, start, label, width in self.fixups:
            off = self.labels[label] - start
            self.buf[pos:pos + width] = struct.pack(">h" if width == 2 else ">i", off)
        return bytes(self.buf)


class ClassBuilder:
    def __init__(self, name, superclass="java/lang/Object", access=ACC_PUBLIC | ACC_SUPER, major=52, interfaces=()):
        self.pool = Pool()
        self.name, self.major, self.access = name, major, access
        self.this = self.pool.cls(name)
        self.super = self.pool.cls(superclass) if superclass else 0
        self.superclass = superclass
        self.interfaces = [self.pool.cls(i) for i in interfaces]
        self.fields, self.methods, self.attributes = [], [], []
        self.expected = []  # (name, descriptor, instruction count, code length)

    def field(self, access, name, desc):
        self.fields.append(struct.pack(">HHHH", access, self.pool.utf8(name), self.pool.utf8(desc), 0))

    def method(self, access, name, desc, code=None, max_stack=4, max_locals=4, handlers=(), lines=None):
        attrs = []
        if code is not None:
            body = code.bytes()
            inner = []
            if lines:
                table = struct.pack(">H", len(lines)) + b"".join(struct.pack(">HH", pc, ln) for pc, ln in lines)
                inner.append(struct.pack(">HI", self.pool.utf8("LineNumberTable"), len(table)) + table)
            exc = struct.pack(">H", len(handlers))
            for s, e, h, t in handlers:
                exc += struct.pack(">HHHH", code.labels[s], code.labels[e], code.labels[h], self.pool.cls(t) if t else 0)
            data = struct.pack(">HHI", max_stack, max_locals, len(body)) + body + exc
            data += struct.pack(">H", len(inner)) + b"".join(inner)
            attrs.append(struct.pack(">HI", self.pool.utf8("Code"), len(data)) + data)
            self.expected.append((name, desc, code.count, len(body)))
        else:
            self.expected.append((name, desc, 0, 0))
        self.methods.append(struct.pack(">HHHH", access, self.pool.utf8(name), self.pool.utf8(desc), len(attrs)) + b"".join(attrs))

    def default_ctor(self):
        c = Code()
        c.op(0x2A)  # aload_0
        c.u2(0xB7, self.pool.method(self.superclass, "<init>", "()V"))
        c.op(0xB1)  # return
        self.method(ACC_PUBLIC, "<init>", "()V", c, max_stack=1, max_locals=1, lines=[(0, 1)])

    def source_file(self, name):
        self.attributes.append(struct.pack(">HIH", self.pool.utf8("SourceFile"), 2, self.pool.utf8(name)))

    def encode(self):
        out = struct.pack(">IHH", 0xCAFEBABE, 0, self.major)
        body = struct.pack(">HHH", self.access, self.this, self.super)
        body += struct.pack(">H", len(self.interfaces)) + b"".join(struct.pack(">H", i) for i in self.interfaces)
        body += struct.pack(">H", len(self.fields)) + b"".join(self.fields)
        body += struct.pack(">H", len(self.methods)) + b"".join(self.methods)
        body += struct.pack(">H", len(self.attributes)) + b"".join(self.attributes)
        return out + self.pool.encode() + body

    def write(self, path):
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.encode())


def simple():
    """`public class Simple { void m() {} }` as javac emits it."""
    cb = ClassBuilder("fixtures/Simple")
    cb.default_ctor()
    c = Code()
    c.op(0xB1)
    cb.method(0, "m", "()V", c, max_stack=0, max_locals=1, lines=[(0, 2)])
    cb.source_file("Simple.java")
    return cb


def shape():
    """`public interface Shape { double area(); String name(); }`"""
    cb = ClassBuilder("fixtures/Shape", access=ACC_PUBLIC | ACC_INTERFACE | ACC_ABSTRACT)
    cb.method(ACC_PUBLIC | ACC_ABSTRACT, "area", "()D")
    cb.method(ACC_PUBLIC | ACC_ABSTRACT, "name", "()Ljava/lang/String;")
    cb.source_file("Shape.java")
    return cb


def switches():
    """Variable-length opcodes: tableswitch, lookupswitch, wide, goto_w."""
    cb = ClassBuilder("fixtures/Switches", major=49)
    p = cb.pool
    cb.field(ACC_PRIVATE, "total", "J")
    cb.default_ctor()

    c = Code()
    c.op(0x1B)  # iload_1
    c.tableswitch(0, ["a", "b", "c"], "d")
    for lbl, k in (("a", 0x04), ("b", 0x05), ("c", 0x06), ("d", 0x02)):
        c.label(lbl)
        c.op(k)
        c.op(0xAC)  # ireturn
    cb.method(ACC_PUBLIC, "table", "(I)I", c, max_stack=1, max_locals=2)

    c = Code()
    c.op(0x1B)
    c.lookupswitch([(1000, "big"), (10, "small"), (-5, "neg")], "dflt")
    c.label("small")
    c.op(0x10, 7)  # bipush 7
    c.op(0xAC)
    c.label("big")
    c.u2(0x11, 700)  # sipush 700
    c.op(0xAC)
    c.label("neg")
    c.op(0x12, p.integer(123456))  # ldc
    c.op(0xAC)
    c.label("dflt")
    c.op(0x03)
    c.op(0xAC)
    cb.method(ACC_PUBLIC, "lookup", "(I)I", c, max_stack=1, max_locals=2)

    c = Code()
    c.op(0x03)  # iconst_0
    c.wide(0x36, 299)  # wide istore 299
    c.wide(0x84, 299, 1000)  # wide iinc 299 1000
    c.u2(0x14, p.long(1234567890123))  # ldc2_w
    c.wide(0x37, 300)  # wide lstore 300
    c.wide(0x16, 300)  # wide lload 300
    c.u2(0x14, p.double(2.5))  # ldc2_w double
    c.op(0x8F)  # d2l
    c.op(0x61)  # ladd
    c.op(0xAD)  # lreturn
    cb.method(ACC_PUBLIC | ACC_STATIC, "wideOps", "()J", c, max_stack=6, max_locals=302)

    c = Code()
    c.op(0x1A)  # iload_0
    c.op(0x1B)  # iload_1
    c.branch(0xA1, "lt")  # if_icmplt
    c.op(0x1A)
    c.branch(0xC8, "ret", wide=True)  # goto_w
    c.label("lt")
    c.op(0x1B)
    c.label("ret")
    c.op(0xAC)
    cb.method(ACC_PUBLIC | ACC_STATIC, "max", "(II)I", c, max_stack=2, max_locals=2)

    c = Code()
    c.label("start")
    c.op(0x2A)  # aload_0
    c.op(0x59)  # dup
    c.u2(0xB4, p.field("fixtures/Switches", "total", "J"))  # getfield
    c.op(0x0A)  # lconst_1
    c.op(0x61)  # ladd
    c.u2(0xB5, p.field("fixtures/Switches", "total", "J"))  # putfield
    c.op(0x10, 3)  # bipush 3
    c.op(0xBC, 10)  # newarray int
    c.op(0x57)  # pop
    c.op(0x05)  # iconst_2
    c.op(0x05)
    c.u2(0xC5, p.cls("[[Ljava/lang/String;"))  # multianewarray ...
    c.buf.append(2)  # dims
    c.u2(0xC0, p.cls("[[Ljava/lang/String;"))  # checkcast
    c.op(0x4C)  # astore_1
    c.op(0x2B)  # aload_1
    c.op(0x03)
    c.op(0x32)  # aaload
    c.op(0x12, p.string("x"))  # ldc "x"
    c.u2(0xB9, p.imethod("java/util/List", "add", "(Ljava/lang/Object;)Z"))  # invokeinterface (pool ref only)
    c.buf += bytes([2, 0])
    c.op(0x57)  # pop
    c.label("end")
    c.op(0xB1)
    c.label("handler")
    c.op(0x4D)  # astore_2
    c.op(0xB1)
    cb.method(ACC_PUBLIC, "mixed", "()V", c, max_stack=4, max_locals=3,
              handlers=[("start", "end", "handler", "java/lang/RuntimeException")])

    cb.method(ACC_PUBLIC | ACC_NATIVE, "nat", "()V")
    # Pool-only entries exercising the remaining constant kinds.
    p.method_handle(6, p.method("fixtures/Switches", "max", "(II)I"))
    p.method_type("(I)I")
    p.integer(-1)
    cb.source_file("Switches.java")
    return cb


def outer_and_inner():
    """`class Outer { class Inner { int get() { return 42; } } }`"""
    outer = ClassBuilder("fixtures/Outer")
    outer.default_ctor()
    outer.source_file("Outer.java")

    inner = ClassBuilder("fixtures/Outer$Inner", access=ACC_SUPER)
    inner.field(ACC_FINAL | 0x1000, "this$0", "Lfixtures/Outer;")
    c = Code()
    c.op(0x2A)
    c.op(0x2B)
    c.u2(0xB5, inner.pool.field("fixtures/Outer$Inner", "this$0", "Lfixtures/Outer;"))
    c.op(0x2A)
    c.u2(0xB7, inner.pool.method("java/lang/Object", "<init>", "()V"))
    c.op(0xB1)
    inner.method(0, "<init>", "(Lfixtures/Outer;)V", c, max_stack=2, max_locals=2)
    c = Code()
    c.op(0x10, 42)
    c.op(0xAC)
    inner.method(0, "get", "()I", c, max_stack=1, max_locals=1)
    inner.source_file("Outer.java")
    return outer, inner


def count_insns_driver():
    """Oracle driver: prints `class`, then `name descriptor count code_length` per method."""
    cb = ClassBuilder("CountInsns")
    p = cb.pool
    cb.default_ctor()
    c = Code()
    CF, CM, MM = "java/lang/classfile/ClassFile", "java/lang/classfile/ClassModel", "java/lang/classfile/MethodModel"
    U8 = "java/lang/classfile/constantpool/Utf8Entry"
    SB = "java/lang/StringBuilder"

    def sb_append(desc):
        c.u2(0xB6, p.method(SB, "append", desc))

    # byte[] b = Files.readAllBytes(new File(args[0]).toPath())
    c.u2(0xB8, p.imethod(CF, "of", "()L%s;" % CF))
    c.u2(0xBB, p.cls("java/io/File"))
    c.op(0x59)
    c.op(0x2A)
    c.op(0x03)
    c.op(0x32)
    c.u2(0xB7, p.method("java/io/File", "<init>", "(Ljava/lang/String;)V"))
    c.u2(0xB6, p.method("java/io/File", "toPath", "()Ljava/nio/file/Path;"))
    c.u2(0xB8, p.method("java/nio/file/Files", "readAllBytes", "(Ljava/nio/file/Path;)[B"))
    c.u2(0xB9, p.imethod(CF, "parse", "([B)L%s;" % CM)); c.buf += bytes([2, 0])
    c.op(0x4C)  # astore_1 cm
    c.u2(0xB2, p.field("java/lang/System", "out", "Ljava/io/PrintStream;"))
    c.op(0x4D)  # astore_2 out
    c.op(0x2C)
    c.op(0x2B)
    c.u2(0xB9, p.imethod(CM, "thisClass", "()Ljava/lang/classfile/constantpool/ClassEntry;")); c.buf += bytes([1, 0])
    c.u2(0xB9, p.imethod("java/lang/classfile/constantpool/ClassEntry", "asInternalName", "()Ljava/lang/String;")); c.buf += bytes([1, 0])
    c.u2(0xB6, p.method("java/io/PrintStream", "println", "(Ljava/lang/String;)V"))
    c.op(0x2B)
    c.u2(0xB9, p.imethod(CM, "methods", "()Ljava/util/List;")); c.buf += bytes([1, 0])
    c.u2(0xB9, p.imethod("java/util/List", "iterator", "()Ljava/util/Iterator;")); c.buf += bytes([1, 0])
    c.op(0x4E)  # astore_3 it
    c.label("loop")
    c.op(0x2D)
    c.u2(0xB9, p.imethod("java/util/Iterator", "hasNext", "()Z")); c.buf += bytes([1, 0])
    c.branch(0x99, "end")  # ifeq
    c.op(0x2D)
    c.u2(0xB9, p.imethod("java/util/Iterator", "next", "()Ljava/lang/Object;")); c.buf += bytes([1, 0])
    c.u2(0xC0, p.cls(MM))
    c.op(0x3A, 4)  # astore 4 mm
    c.op(0x03)
    c.op(0x36, 5)  # istore 5 n
    c.op(0x03)
    c.op(0x36, 7)  # istore 7 len
    c.op(0x19, 4)
    c.u2(0xB9, p.imethod(MM, "code", "()Ljava/util/Optional;")); c.buf += bytes([1, 0])
    c.op(0x3A, 8)  # astore 8 opt
    c.op(0x19, 8)
    c.u2(0xB6, p.method("java/util/Optional", "isPresent", "()Z"))
    c.branch(0x99, "print")
    c.op(0x19, 8)
    c.u2(0xB6, p.method("java/util/Optional", "get", "()Ljava/lang/Object;"))
    c.u2(0xC0, p.cls("java/lang/classfile/attribute/CodeAttribute"))
    c.op(0x3A, 9)  # astore 9 code
    c.op(0x19, 9)
    c.u2(0xB9, p.imethod("java/lang/classfile/attribute/CodeAttribute", "codeLength", "()I")); c.buf += bytes([1, 0])
    c.op(0x36, 7)
    c.op(0x19, 9)
    c.u2(0xB9, p.imethod("java/lang/classfile/CodeModel", "iterator", "()Ljava/util/Iterator;")); c.buf += bytes([1, 0])
    c.op(0x3A, 6)  # astore 6 ci
    c.label("inner")
    c.op(0x19, 6)
    c.u2(0xB9, p.imethod("java/util/Iterator", "hasNext", "()Z")); c.buf += bytes([1, 0])
    c.branch(0x99, "print")
    c.op(0x19, 6)
    c.u2(0xB9, p.imethod("java/util/Iterator", "next", "()Ljava/lang/Object;")); c.buf += bytes([1, 0])
    c.u2(0xC1, p.cls("java/lang/classfile/Instruction"))  # instanceof
    c.branch(0x99, "inner")
    c.wide(0x84, 5, 1) if False else c.op(0x84, 5, 1)  # iinc 5 1
    c.branch(0xA7, "inner")
    c.label("print")
    c.op(0x2C)
    c.u2(0xBB, p.cls(SB))
    c.op(0x59)
    c.u2(0xB7, p.method(SB, "<init>", "()V"))
    c.op(0x19, 4)
    c.u2(0xB9, p.imethod(MM, "methodName", "()L%s;" % U8)); c.buf += bytes([1, 0])
    c.u2(0xB9, p.imethod(U8, "stringValue", "()Ljava/lang/String;")); c.buf += bytes([1, 0])
    sb_append("(Ljava/lang/String;)Ljava/lang/StringBuilder;")
    c.op(0x10, 32)
    sb_append("(C)Ljava/lang/StringBuilder;")
    c.op(0x19, 4)
    c.u2(0xB9, p.imethod(MM, "methodType", "()L%s;" % U8)); c.buf += bytes([1, 0])
    c.u2(0xB9, p.imethod(U8, "stringValue", "()Ljava/lang/String;")); c.buf += bytes([1, 0])
    sb_append("(Ljava/lang/String;)Ljava/lang/StringBuilder;")
    c.op(0x10, 32)
    sb_append("(C)Ljava/lang/StringBuilder;")
    c.op(0x15, 5)
    sb_append("(I)Ljava/lang/StringBuilder;")
    c.op(0x10, 32)
    sb_append("(C)Ljava/lang/StringBuilder;")
    c.op(0x15, 7)
    sb_append("(I)Ljava/lang/StringBuilder;")
    c.u2(0xB6, p.method(SB, "toString", "()Ljava/lang/String;"))
    c.u2(0xB6, p.method("java/io/PrintStream", "println", "(Ljava/lang/String;)V"))
    c.branch(0xA7, "loop")
    c.label("end")
    c.op(0xB1)
    cb.method(ACC_PUBLIC | ACC_STATIC, "main", "([Ljava/lang/String;)V", c, max_stack=6, max_locals=10)
    return cb


def main():
    fixtures = [simple(), shape(), switches(), *outer_and_inner()]
    for cb in fixtures:
        out = HERE / (cb.name.split("/")[-1] + ".class")
        cb.write(out)
        print(cb.name)
        for name, desc, count, length in cb.expected:
            print(f"  {name} {desc} {count} {length}")
    count_insns_driver().write(HERE / "oracle" / "CountInsns.class")


if __name__ == "__main__":
    main()
