/**
 * Login flow: password, then mandatory TOTP. Accounts without a confirmed
 * authenticator are walked through enrollment (the provisioning URI is shown
 * for the authenticator app) before anything else is reachable.
 */

import { ApiError, type ApiClient } from "../api";

export interface LoginOptions {
  api: ApiClient;
  onAuthenticated: (token: string) => void;
}

export function createLoginView(options: LoginOptions): HTMLElement {
  const root = document.createElement("section");
  root.className = "login-view";

  const error = document.createElement("p");
  error.className = "form-error hidden";

  const passwordForm = document.createElement("form");
  passwordForm.dataset.control = "password-login";
  const identifier = Object.assign(document.createElement("input"),
                                   { placeholder: "handle or email", required: true });
  const password = Object.assign(document.createElement("input"),
                                 { placeholder: "password", type: "password", required: true });
  const loginButton = Object.assign(document.createElement("button"),
                                    { type: "submit", textContent: "log in" });
  passwordForm.append(identifier, password, loginButton);

  const totpForm = document.createElement("form");
  totpForm.dataset.control = "totp-verify";
  totpForm.classList.add("hidden");
  const totpHint = document.createElement("p");
  const code = Object.assign(document.createElement("input"),
                             { placeholder: "6-digit code", required: true });
  const verifyButton = Object.assign(document.createElement("button"),
                                     { type: "submit", textContent: "verify" });
  totpForm.append(totpHint, code, verifyButton);

  let halfToken: string | null = null;
  let pendingDeviceId: string | null = null;

  passwordForm.addEventListener("submit", (event) => {
    event.preventDefault();
    error.classList.add("hidden");
    options.api.login(identifier.value, password.value).then(async (result) => {
      halfToken = result.token;
      options.api.token = halfToken;
      if (!result.second_factor_enrolled) {
        const enrollment = await options.api.enroll2fa("browser enrollment");
        pendingDeviceId = enrollment.device_id;
        totpHint.textContent =
          `Two-factor authentication is mandatory. Add this to your authenticator, `
          + `then enter the current code: ${enrollment.provisioning_uri}`;
      } else {
        pendingDeviceId = null;
        totpHint.textContent = "Enter the current code from your authenticator.";
      }
      passwordForm.classList.add("hidden");
      totpForm.classList.remove("hidden");
    }).catch((failure) => {
      error.textContent = failure instanceof ApiError ? failure.code : String(failure);
      error.classList.remove("hidden");
    });
  });

  totpForm.addEventListener("submit", (event) => {
    event.preventDefault();
    error.classList.add("hidden");
    options.api.verify2fa(code.value, pendingDeviceId ?? undefined).then((result) => {
      options.onAuthenticated(result.token);
    }).catch((failure) => {
      error.textContent = failure instanceof ApiError ? failure.code : String(failure);
      error.classList.remove("hidden");
    });
  });

  root.append(passwordForm, totpForm, error);
  return root;
}
