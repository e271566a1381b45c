//! Declarative Java test-class fixtures.
//!
//! A fixture declares its tool memberships and methods as structured data;
//! rendering produces the actual `.java` source (imports realize the
//! declared tool keywords). The oracle reasons about the declared structure
//! only, so agreement between the analyzer and the oracle validates the
//! whole extraction and classification path.

/// Import realizing each builtin tool's detection keyword.
pub fn import_for_tool(tool: &str) -> &'static str {
    match tool {
        "Espresso" => "import static android.support.test.espresso.Espresso.onView;",
        "UIAutomator" => "import android.support.test.uiautomator.UiDevice;",
        "Selendroid" => "import io.selendroid.SelendroidDriver;",
        "Robotium" => "import com.robotium.solo.Solo;",
        "Robolectric" => "import org.robolectric.RobolectricTestRunner;",
        "Appium" => "import io.appium.java_client.AppiumDriver;",
        "JUnit" => "import org.junit.Test;",
        other => panic!("unknown tool {other}"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodFixture {
    pub annotations: Vec<String>,
    pub name: String,
    /// (type, name) pairs.
    pub params: Vec<(String, String)>,
    /// Statements; the oracle's identity for the method body.
    pub body: Vec<String>,
    pub is_constructor: bool,
}

impl MethodFixture {
    pub fn test(name: &str, body: &[&str]) -> Self {
        Self {
            annotations: vec!["@Test".to_string()],
            name: name.to_string(),
            params: Vec::new(),
            body: body.iter().map(|s| s.to_string()).collect(),
            is_constructor: false,
        }
    }

    pub fn helper(name: &str, body: &[&str]) -> Self {
        Self {
            annotations: Vec::new(),
            name: name.to_string(),
            params: Vec::new(),
            body: body.iter().map(|s| s.to_string()).collect(),
            is_constructor: false,
        }
    }

    pub fn constructor(class: &str, body: &[&str]) -> Self {
        Self {
            annotations: Vec::new(),
            name: class.to_string(),
            params: Vec::new(),
            body: body.iter().map(|s| s.to_string()).collect(),
            is_constructor: true,
        }
    }

    /// Matching key, mirroring signature matching (name + param types).
    pub fn key(&self) -> (String, Vec<String>) {
        (self.name.clone(), self.params.iter().map(|(t, _)| t.clone()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JavaFileFixture {
    /// Declared tool memberships; rendering adds the matching imports.
    pub tools: Vec<&'static str>,
    /// Imports beyond the tool ones (import-only change scenarios).
    pub extra_imports: Vec<String>,
    pub class_name: String,
    pub fields: Vec<String>,
    pub methods: Vec<MethodFixture>,
    /// Deterministic comment/whitespace noise; different values change bytes
    /// without changing any normalized body.
    pub noise: u32,
}

impl JavaFileFixture {
    pub fn new(class_name: &str, tools: &[&'static str]) -> Self {
        Self {
            tools: tools.to_vec(),
            extra_imports: Vec::new(),
            class_name: class_name.to_string(),
            fields: Vec::new(),
            methods: Vec::new(),
            noise: 0,
        }
    }

    pub fn with_methods(mut self, methods: Vec<MethodFixture>) -> Self {
        self.methods = methods;
        self
    }

    pub fn with_fields(mut self, fields: &[&str]) -> Self {
        self.fields = fields.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_extra_imports(mut self, imports: &[&str]) -> Self {
        self.extra_imports = imports.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_noise(mut self, noise: u32) -> Self {
        self.noise = noise;
        self
    }

    pub fn non_constructor_count(&self) -> u64 {
        self.methods.iter().filter(|m| !m.is_constructor).count() as u64
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("package fixture.app;\n\n");
        let mut imports: Vec<String> = self
            .tools
            .iter()
            .map(|t| import_for_tool(t).to_string())
            .chain(self.extra_imports.iter().cloned())
            .collect();
        imports.sort();
        imports.dedup();
        for import in &imports {
            out.push_str(import);
            out.push('\n');
        }
        out.push('\n');
        if self.noise % 3 == 1 {
            out.push_str("// release housekeeping\n");
        }
        out.push_str(&format!("public class {} {{\n", self.class_name));
        for field in &self.fields {
            out.push_str(&format!("    {field}\n"));
        }
        if self.noise % 3 == 2 {
            out.push_str("    /* layout pass */\n");
        }
        for (idx, method) in self.methods.iter().enumerate() {
            out.push('\n');
            for ann in &method.annotations {
                out.push_str(&format!("    {ann}\n"));
            }
            let params = method
                .params
                .iter()
                .map(|(t, n)| format!("{t} {n}"))
                .collect::<Vec<_>>()
                .join(", ");
            if method.is_constructor {
                out.push_str(&format!("    public {}({params}) {{\n", method.name));
            } else {
                out.push_str(&format!("    public void {}({params}) {{\n", method.name));
            }
            if self.noise % 2 == 1 && idx == 0 {
                out.push_str("        // noisy comment\n");
            }
            for stmt in &method.body {
                // Vary indentation with noise; whitespace never matters.
                if self.noise % 5 == 3 {
                    out.push_str(&format!("          {stmt}\n"));
                } else {
                    out.push_str(&format!("        {stmt}\n"));
                }
            }
            out.push_str("    }\n");
        }
        out.push_str("}\n");
        out
    }
}
