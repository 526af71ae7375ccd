/**
 * Post composer: live character counter in Unicode scalar values (matching
 * the server's rule exactly), submit disabled past 280, server rejections
 * (moderation, length) rendered inline.
 */

import { ApiError } from "../api";
import { countScalars, MAX_POST_SCALARS } from "../scalars";
import type { PostItem } from "../types";

export interface ComposerOptions {
  placeholder?: string;
  submit: (body: string) => Promise<PostItem>;
  onPosted?: (post: PostItem) => void;
}

export function createComposer(options: ComposerOptions): HTMLElement {
  const form = document.createElement("form");
  form.className = "composer";

  const input = document.createElement("textarea");
  input.className = "composer-input";
  input.placeholder = options.placeholder ?? "say something";

  const counter = document.createElement("span");
  counter.className = "composer-counter";

  const error = document.createElement("p");
  error.className = "composer-error hidden";

  const button = document.createElement("button");
  button.type = "submit";
  button.dataset.action = "submit-post";
  button.textContent = "post";

  function sync() {
    const used = countScalars(input.value);
    counter.textContent = `${used}/${MAX_POST_SCALARS}`;
    const over = used > MAX_POST_SCALARS;
    counter.classList.toggle("over-limit", over);
    button.disabled = over || used === 0;
  }

  input.addEventListener("input", sync);
  sync();

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const body = input.value;
    if (countScalars(body) === 0 || countScalars(body) > MAX_POST_SCALARS) return;
    error.classList.add("hidden");
    button.disabled = true;
    options.submit(body).then((post) => {
      input.value = "";
      sync();
      options.onPosted?.(post);
    }).catch((failure) => {
      sync();
      error.classList.remove("hidden");
      if (failure instanceof ApiError) {
        const terms = (failure.details["matched_terms"] as string[] | undefined) ?? [];
        error.textContent = terms.length > 0
          ? `${failure.code}: blocked terms ${terms.join(", ")}`
          : `${failure.code}: ${failure.message}`;
      } else {
        error.textContent = String(failure);
      }
    });
  });

  form.append(input, counter, button, error);
  return form;
}
