// The composer: live counter, hard stop at 281 scalars, inline server errors.

import { createComposer } from "../src/components/composer";
import { ApiError } from "../src/api";
import type { PostItem } from "../src/types";

function mount(submit: (body: string) => Promise<PostItem>) {
  const composer = createComposer({ submit });
  document.body.appendChild(composer);
  const input = composer.querySelector("textarea")!;
  const counter = composer.querySelector(".composer-counter")!;
  const button = composer.querySelector<HTMLButtonElement>(
    "button[data-action=submit-post]")!;
  const type = (text: string) => {
    input.value = text;
    input.dispatchEvent(new Event("input"));
  };
  return { composer, input, counter, button, type };
}

afterEach(() => { document.body.textContent = ""; });

test("counter tracks scalar values and submit disables past 280", () => {
  const { counter, button, type } = mount(async () => ({} as PostItem));

  type("hello");
  expect(counter.textContent).toBe("5/280");
  expect(button.disabled).toBe(false);

  type("x".repeat(280));
  expect(counter.textContent).toBe("280/280");
  expect(counter.classList.contains("over-limit")).toBe(false);
  expect(button.disabled).toBe(false);

  type("x".repeat(281));
  expect(counter.textContent).toBe("281/280");
  expect(counter.classList.contains("over-limit")).toBe(true);
  expect(button.disabled).toBe(true);
});

test("multibyte input counts like the server: 280 emoji fit, 281 do not", () => {
  const { counter, button, type } = mount(async () => ({} as PostItem));
  type("🦜".repeat(280));
  expect(counter.textContent).toBe("280/280");
  expect(button.disabled).toBe(false);
  type("🦜".repeat(281));
  expect(button.disabled).toBe(true);
});

test("empty input cannot be submitted", () => {
  const { button, type } = mount(async () => ({} as PostItem));
  type("");
  expect(button.disabled).toBe(true);
});

test("moderation rejection renders inline with the matched terms", async () => {
  const failure = new ApiError(422, {
    code: "ModerationRejected",
    message: "content rejected by the moderation gate",
    details: { matched_terms: ["nonsense"] },
  });
  const { composer, type } = mount(() => Promise.reject(failure));
  type("some text");
  composer.dispatchEvent(new Event("submit"));
  await Promise.resolve();
  await Promise.resolve();
  const error = composer.querySelector(".composer-error")!;
  expect(error.classList.contains("hidden")).toBe(false);
  expect(error.textContent).toContain("ModerationRejected");
  expect(error.textContent).toContain("nonsense");
});

test("successful post clears the input and reports the created post", async () => {
  const created = { id: "e1:9" } as PostItem;
  let posted: PostItem | null = null;
  const composer = createComposer({
    submit: async () => created,
    onPosted: (post) => { posted = post; },
  });
  document.body.appendChild(composer);
  const input = composer.querySelector("textarea")!;
  input.value = "fresh content";
  input.dispatchEvent(new Event("input"));
  composer.dispatchEvent(new Event("submit"));
  await Promise.resolve();
  await Promise.resolve();
  expect(posted!.id).toBe("e1:9");
  expect(input.value).toBe("");
});
