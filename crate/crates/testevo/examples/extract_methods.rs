//! Extract method boundaries and normalized bodies from Java source without
//! a compiler.
//!
//! ```bash
//! cargo run -p testevo --example extract_methods
//! ```

use testevo::java::extract;

const SOURCE: &str = r#"
package demo;

import static android.support.test.espresso.Espresso.onView;
import org.junit.Test;

public class CheckoutTest {
    private int attempts;

    public CheckoutTest() {
        attempts = 0;
    }

    /* void decoy() { inside a comment } */
    @Test
    public void addsItemToCart() {
        onView(withId(R.id.item)).perform(click());
        onView(withId(R.id.cart_count)).check(matches(withText("1")));
    }

    @Test(timeout = 5000)
    public void checksOutWithCoupon(String code, int[] quantities) {
        String decoy = "void fake() { }";
        apply(code, quantities);
    }

    private void apply(String code, int[] quantities) {
        helperWork(code, quantities.length);
    }
}
"#;

fn main() {
    let snapshot = extract(SOURCE).expect("source is balanced Java");

    println!("methods ({}):", snapshot.methods.len());
    for method in &snapshot.methods {
        println!(
            "  {}{}({}) lines {}..{}{}{}",
            if method.is_constructor { "constructor " } else { "" },
            method.name,
            method.param_types.join(", "),
            method.body_span.0,
            method.body_span.1,
            if method.annotations.is_empty() { String::new() } else { format!("  @{}", method.annotations.join(" @")) },
            "",
        );
        println!("    normalized body: {}", method.normalized_body);
    }

    println!("\ntest methods (non-constructor): {}", snapshot.test_method_count(false));
    println!("test methods (@Test only):      {}", snapshot.test_method_count(true));
    println!("\nnon-method region (imports, fields, headers):\n  {}", snapshot.non_method_normalized);
}
