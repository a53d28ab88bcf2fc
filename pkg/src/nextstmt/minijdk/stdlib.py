"""Built-in class signatures shared by the compiler and the runtime.

Only the slice of the platform and JUnit APIs needed by miniature test
projects is modeled.  Descriptors match the real JDK/JUnit signatures so
classfiles produced against these stubs also link on a stock JVM.
"""

OBJECT = "java/lang/Object"
STRING = "java/lang/String"
THROWABLE = "java/lang/Throwable"

# binary name -> superclass binary name (None for Object)
SUPERS = {
    OBJECT: None,
    STRING: OBJECT,
    "java/lang/CharSequence": OBJECT,
    "java/lang/StringBuilder": OBJECT,
    "java/lang/Math": OBJECT,
    "java/lang/System": OBJECT,
    "java/lang/Integer": OBJECT,
    "java/lang/Long": OBJECT,
    "java/lang/Double": OBJECT,
    "java/lang/Boolean": OBJECT,
    "java/lang/Character": OBJECT,
    "java/lang/Class": OBJECT,
    "java/io/PrintStream": OBJECT,
    "java/io/File": OBJECT,
    "java/util/ArrayList": OBJECT,
    "java/util/List": OBJECT,
    THROWABLE: OBJECT,
    "java/lang/Exception": THROWABLE,
    "java/lang/Error": THROWABLE,
    "java/lang/RuntimeException": "java/lang/Exception",
    "java/lang/IllegalArgumentException": "java/lang/RuntimeException",
    "java/lang/IllegalStateException": "java/lang/RuntimeException",
    "java/lang/NullPointerException": "java/lang/RuntimeException",
    "java/lang/ArithmeticException": "java/lang/RuntimeException",
    "java/lang/ClassCastException": "java/lang/RuntimeException",
    "java/lang/UnsupportedOperationException": "java/lang/RuntimeException",
    "java/lang/IndexOutOfBoundsException": "java/lang/RuntimeException",
    "java/lang/ArrayIndexOutOfBoundsException": "java/lang/IndexOutOfBoundsException",
    "java/lang/NumberFormatException": "java/lang/IllegalArgumentException",
    "java/lang/NegativeArraySizeException": "java/lang/RuntimeException",
    "java/lang/AssertionError": "java/lang/Error",
    "java/lang/StackOverflowError": "java/lang/Error",
    "java/lang/NoClassDefFoundError": "java/lang/Error",
    "org/junit/Assert": OBJECT,
    "org/junit/Test": OBJECT,
    "org/junit/Before": OBJECT,
    "org/junit/After": OBJECT,
    "org/junit/BeforeClass": OBJECT,
    "org/junit/AfterClass": OBJECT,
    "org/junit/Ignore": OBJECT,
    "org/junit/runner/JUnitCore": OBJECT,
    "org/junit/jupiter/api/Assertions": OBJECT,
    "org/junit/jupiter/api/Test": OBJECT,
    "org/junit/jupiter/api/BeforeEach": OBJECT,
    "org/junit/jupiter/api/AfterEach": OBJECT,
    "org/junit/jupiter/api/BeforeAll": OBJECT,
    "org/junit/jupiter/api/AfterAll": OBJECT,
    "org/junit/jupiter/api/Disabled": OBJECT,
}

# class -> implemented interfaces (assignability only)
INTERFACES = {
    STRING: ["java/lang/CharSequence"],
    "java/util/ArrayList": ["java/util/List"],
}

# types that are themselves interfaces
INTERFACE_TYPES = frozenset({"java/lang/CharSequence", "java/util/List"})

ANNOTATIONS = frozenset(
    n for n in SUPERS
    if n.startswith(("org/junit/", "org/junit/jupiter/api/"))
    and n.rsplit("/", 1)[-1] in (
        "Test", "Before", "After", "BeforeClass", "AfterClass", "Ignore",
        "BeforeEach", "AfterEach", "BeforeAll", "AfterAll", "Disabled",
    )
)

_S = f"L{STRING};"
_O = f"L{OBJECT};"

# binary name -> list of (method name, descriptor, is_static)
METHODS = {
    OBJECT: [
        ("<init>", "()V", False),
        ("toString", f"(){_S}", False),
        ("equals", f"({_O})Z", False),
        ("hashCode", "()I", False),
    ],
    STRING: [
        ("length", "()I", False),
        ("isEmpty", "()Z", False),
        ("charAt", "(I)C", False),
        ("indexOf", f"({_S})I", False),
        ("contains", "(Ljava/lang/CharSequence;)Z", False),
        ("concat", f"({_S}){_S}", False),
        ("substring", f"(I){_S}", False),
        ("substring", f"(II){_S}", False),
        ("equals", f"({_O})Z", False),
        ("startsWith", f"({_S})Z", False),
        ("endsWith", f"({_S})Z", False),
        ("trim", f"(){_S}", False),
        ("toUpperCase", f"(){_S}", False),
        ("toLowerCase", f"(){_S}", False),
        ("replace", f"(CC){_S}", False),
        ("toString", f"(){_S}", False),
        ("valueOf", f"(I){_S}", True),
        ("valueOf", f"(J){_S}", True),
        ("valueOf", f"(D){_S}", True),
        ("valueOf", f"(Z){_S}", True),
        ("valueOf", f"(C){_S}", True),
        ("valueOf", f"({_O}){_S}", True),
    ],
    "java/lang/StringBuilder": [
        ("<init>", "()V", False),
        ("<init>", f"({_S})V", False),
        ("append", f"({_S})Ljava/lang/StringBuilder;", False),
        ("append", "(I)Ljava/lang/StringBuilder;", False),
        ("append", "(J)Ljava/lang/StringBuilder;", False),
        ("append", "(D)Ljava/lang/StringBuilder;", False),
        ("append", "(Z)Ljava/lang/StringBuilder;", False),
        ("append", "(C)Ljava/lang/StringBuilder;", False),
        ("append", f"({_O})Ljava/lang/StringBuilder;", False),
        ("toString", f"(){_S}", False),
    ],
    "java/lang/Math": [
        ("abs", "(I)I", True),
        ("abs", "(J)J", True),
        ("abs", "(D)D", True),
        ("max", "(II)I", True),
        ("max", "(JJ)J", True),
        ("max", "(DD)D", True),
        ("min", "(II)I", True),
        ("min", "(JJ)J", True),
        ("min", "(DD)D", True),
        ("sqrt", "(D)D", True),
        ("pow", "(DD)D", True),
        ("floor", "(D)D", True),
        ("ceil", "(D)D", True),
    ],
    "java/lang/System": [
        ("exit", "(I)V", True),
        ("currentTimeMillis", "()J", True),
        ("lineSeparator", f"(){_S}", True),
        ("nanoTime", "()J", True),
    ],
    "java/lang/Integer": [
        ("parseInt", f"({_S})I", True),
        ("toString", f"(I){_S}", True),
    ],
    "java/lang/Long": [
        ("parseLong", f"({_S})J", True),
        ("toString", f"(J){_S}", True),
    ],
    "java/lang/Double": [
        ("parseDouble", f"({_S})D", True),
        ("toString", f"(D){_S}", True),
        ("isNaN", "(D)Z", True),
    ],
    "java/lang/Boolean": [
        ("parseBoolean", f"({_S})Z", True),
        ("toString", f"(Z){_S}", True),
    ],
    "java/io/PrintStream": [
        ("println", "()V", False),
        ("println", f"({_S})V", False),
        ("println", "(I)V", False),
        ("println", "(J)V", False),
        ("println", "(D)V", False),
        ("println", "(Z)V", False),
        ("println", "(C)V", False),
        ("println", f"({_O})V", False),
        ("print", f"({_S})V", False),
        ("print", "(I)V", False),
        ("print", "(J)V", False),
        ("print", "(D)V", False),
        ("print", "(Z)V", False),
        ("print", "(C)V", False),
        ("print", f"({_O})V", False),
        ("flush", "()V", False),
    ],
    "java/io/File": [
        ("<init>", f"({_S})V", False),
        ("getPath", f"(){_S}", False),
        ("getName", f"(){_S}", False),
        ("exists", "()Z", False),
        ("isFile", "()Z", False),
        ("isDirectory", "()Z", False),
        ("toString", f"(){_S}", False),
    ],
    "java/util/ArrayList": [
        ("<init>", "()V", False),
        ("add", f"({_O})Z", False),
        ("get", f"(I){_O}", False),
        ("size", "()I", False),
        ("isEmpty", "()Z", False),
        ("contains", f"({_O})Z", False),
        ("clear", "()V", False),
        ("remove", f"(I){_O}", False),
        ("set", f"(I{_O}){_O}", False),
        ("toString", f"(){_S}", False),
    ],
    "java/util/List": [
        ("add", f"({_O})Z", False),
        ("get", f"(I){_O}", False),
        ("size", "()I", False),
        ("isEmpty", "()Z", False),
        ("contains", f"({_O})Z", False),
        ("clear", "()V", False),
        ("remove", f"(I){_O}", False),
        ("set", f"(I{_O}){_O}", False),
    ],
    THROWABLE: [
        ("<init>", "()V", False),
        ("<init>", f"({_S})V", False),
        ("getMessage", f"(){_S}", False),
        ("toString", f"(){_S}", False),
    ],
    "org/junit/Assert": [
        ("assertTrue", "(Z)V", True),
        ("assertTrue", f"({_S}Z)V", True),
        ("assertFalse", "(Z)V", True),
        ("assertFalse", f"({_S}Z)V", True),
        ("assertEquals", f"({_O}{_O})V", True),
        ("assertEquals", f"({_S}{_O}{_O})V", True),
        ("assertEquals", "(JJ)V", True),
        ("assertEquals", "(DD)V", True),
        ("assertEquals", "(DDD)V", True),
        ("assertNotNull", f"({_O})V", True),
        ("assertNotNull", f"({_S}{_O})V", True),
        ("assertNull", f"({_O})V", True),
        ("assertNull", f"({_S}{_O})V", True),
        ("assertSame", f"({_O}{_O})V", True),
        ("fail", "()V", True),
        ("fail", f"({_S})V", True),
    ],
    "org/junit/runner/JUnitCore": [
        ("main", f"([{_S})V", True),
    ],
    "org/junit/jupiter/api/Assertions": [
        ("assertTrue", "(Z)V", True),
        ("assertFalse", "(Z)V", True),
        ("assertEquals", f"({_O}{_O})V", True),
        ("assertEquals", "(JJ)V", True),
        ("assertEquals", "(DD)V", True),
        ("assertEquals", "(DDD)V", True),
        ("assertNotNull", f"({_O})V", True),
        ("assertNull", f"({_O})V", True),
        ("fail", "()V", True),
        ("fail", f"({_S})V", True),
    ],
}

# exception types inherit Throwable's constructors and accessors
for _exc, _sup in SUPERS.items():
    if _exc == THROWABLE:
        continue
    _chain = _sup
    while _chain is not None:
        if _chain == THROWABLE:
            METHODS.setdefault(_exc, list(METHODS[THROWABLE]))
            break
        _chain = SUPERS.get(_chain)
# AssertionError's real message constructor takes Object
METHODS["java/lang/AssertionError"] = [
    ("<init>", "()V", False),
    ("<init>", f"({_O})V", False),
    ("getMessage", f"(){_S}", False),
    ("toString", f"(){_S}", False),
]

# binary name -> {field name: (descriptor, is_static)}
FIELDS = {
    "java/lang/System": {
        "out": ("Ljava/io/PrintStream;", True),
        "err": ("Ljava/io/PrintStream;", True),
    },
    "java/lang/Integer": {
        "MAX_VALUE": ("I", True),
        "MIN_VALUE": ("I", True),
    },
    "java/lang/Long": {
        "MAX_VALUE": ("J", True),
        "MIN_VALUE": ("J", True),
    },
}

# simple names importable without an explicit import statement
JAVA_LANG_DEFAULTS = {
    name.rsplit("/", 1)[-1]: name
    for name in SUPERS
    if name.startswith("java/lang/") and name.count("/") == 2
}


def is_known(binary_name):
    return binary_name in SUPERS


def superclass(binary_name):
    return SUPERS.get(binary_name)


def interfaces_of(binary_name):
    return INTERFACES.get(binary_name, [])


def methods_of(binary_name):
    return METHODS.get(binary_name, [])


def fields_of(binary_name):
    return FIELDS.get(binary_name, {})


def is_throwable(binary_name, user_supers=None):
    seen = set()
    cur = binary_name
    while cur is not None and cur not in seen:
        if cur == THROWABLE:
            return True
        seen.add(cur)
        nxt = SUPERS.get(cur)
        if nxt is None and user_supers is not None:
            nxt = user_supers(cur)
        cur = nxt
    return False
