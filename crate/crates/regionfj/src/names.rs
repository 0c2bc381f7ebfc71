//! String newtypes for the different name spaces of a program: classes,
//! variables, fields, methods, and allocation labels.
//!
//! Keeping them distinct prevents the classic mix-up bugs (a field name used
//! where a variable is expected, and so on) and gives every name a stable,
//! deterministic ordering.

use std::fmt;

macro_rules! name_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
        pub struct $name(String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                $name(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }
    };
}

name_type!(
    /// A class name, such as `Node` or the distinguished `Object`/`NullType`.
    ClassName
);
name_type!(
    /// A variable name: `this`, a method parameter, or a `let`-bound local.
    VarName
);
name_type!(
    /// A field name.
    FieldName
);
name_type!(
    /// A method name.
    MethodName
);
name_type!(
    /// An allocation label, written `new[label] C()` in source. Labels are
    /// globally unique within a program and name the region of every object
    /// the annotated expression creates.
    Label
);

impl ClassName {
    /// The root of every class hierarchy.
    pub fn object() -> Self {
        ClassName::new("Object")
    }

    /// The class of the `null` literal; a subtype of every class.
    pub fn null_type() -> Self {
        ClassName::new("NullType")
    }
}

impl VarName {
    /// The distinguished receiver variable.
    pub fn this() -> Self {
        VarName::new("this")
    }
}
